// carasel run <problem.json> [key=value ...] | carasel report <certificate.json>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carasel/errors.hpp"
#include "carasel/io.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kParse = 2, kPrecondition = 3, kNoCertificate = 4 };

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string default_out(const std::string& input) {
  const std::string suffix = ".json";
  if (input.size() > suffix.size() && input.compare(input.size() - suffix.size(), suffix.size(), suffix) == 0)
    return input.substr(0, input.size() - suffix.size()) + ".cert.json";
  return input + ".cert.json";
}

struct RunArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::string out;
  std::string tol, eps_eq, mesh, seed, mode;
  bool strict_cip = false;
};

int run(const RunArgs& a) {
  std::string text;
  if (!read_file(a.file, text)) {
    std::cerr << "error: cannot read " << a.file << "\n";
    return kParse;
  }
  carasel::io::ProblemSpec p;
  try {
    p = carasel::io::parse_problem(text);
    for (const auto& kv : a.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw carasel::io::ParseError("override '" + kv + "': expected key=value");
      carasel::io::apply_override(p, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!a.tol.empty()) carasel::io::apply_override(p, "tol", a.tol);
    if (!a.eps_eq.empty()) carasel::io::apply_override(p, "eps_eq", a.eps_eq);
    if (!a.mesh.empty()) carasel::io::apply_override(p, "mesh", a.mesh);
    if (!a.seed.empty()) carasel::io::apply_override(p, "seed", a.seed);
    if (!a.mode.empty()) carasel::io::apply_override(p, "mode", a.mode);
    if (a.strict_cip) carasel::io::apply_override(p, "strict_cip", "true");
  } catch (const carasel::io::ParseError& e) {
    std::cerr << a.file << ": " << e.what() << "\n";
    return kParse;
  }

  carasel::io::json cert;
  try {
    cert = carasel::io::certify(p, utc_timestamp());
  } catch (const carasel::PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const carasel::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const carasel::UnsupportedInstanceError& e) {
    std::cerr << "unsupported instance: " << e.what() << "\n";
    return kPrecondition;
  }

  const std::string out = a.out.empty() ? default_out(a.file) : a.out;
  std::ofstream os(out, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot write " << out << "\n";
    return kFailed;
  }
  os << carasel::io::canonical_dump(cert);
  const std::string status = cert.at("status").get<std::string>();
  std::cout << status << ": " << out << "\n";
  if (status == "ok") return kOk;
  if (status == "no-certificate") return kNoCertificate;
  return kFailed;
}

int report(const std::string& path) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "error: cannot read " << path << "\n";
    return kParse;
  }
  try {
    std::cout << carasel::io::report(carasel::io::parse_json(text));
  } catch (const carasel::Error& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kParse;
  } catch (const carasel::io::json::exception& e) {
    std::cerr << path << ": not a certificate: " << e.what() << "\n";
    return kParse;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified selections, random fixed points and random equilibria on finite grids"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a problem file and write its certificate");
  run_cmd->add_option("file", ra.file, "Problem JSON")->required();
  run_cmd->add_option("overrides", ra.overrides, "Option overrides as key=value");
  run_cmd->add_option("--out", ra.out, "Certificate path (default: <file>.cert.json)");
  run_cmd->add_option("--tol", ra.tol, "Membership / fixed-point tolerance");
  run_cmd->add_option("--eps-eq", ra.eps_eq, "Equilibrium regret tolerance");
  run_cmd->add_option("--mesh", ra.mesh, "Claimed grid mesh h (adjacency radius defaults to 2h)");
  run_cmd->add_option("--seed", ra.seed, "Seed for randomized restarts and spot checks");
  run_cmd->add_option("--mode", ra.mode, "CIP witness mode")->check(CLI::IsMember({"atomic", "shared", "countable", "indexed"}));
  run_cmd->add_flag("--strict-cip", ra.strict_cip, "Whole-grid l.s.c. form of the CIP");

  std::string cert_path;
  auto* report_cmd = app.add_subcommand("report", "Summarize a certificate");
  report_cmd->add_option("certificate", cert_path, "Certificate JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kParse;
  }
  if (run_cmd->parsed()) return run(ra);
  return report(cert_path);
}
