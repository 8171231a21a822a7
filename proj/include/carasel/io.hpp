#pragma once

// Problem files and certificates (JSON). Parsing goes through a typed model so
// that serialize(parse(text)) is a canonical form.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carasel/errors.hpp"
#include "carasel/setops.hpp"

namespace carasel::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed JSON (line/column known) or a schema violation (path known, line/column 0).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct GridSpec {
  bool is_box = false;
  Vec lo, hi;
  std::vector<std::size_t> counts;
  std::vector<Vec> points;
  std::optional<double> mesh;
  std::optional<double> adjacency_radius;
};

/// One tabulated value: {atom, node, vertices}; an empty vertex list is the empty set.
struct Record {
  std::string atom;
  std::size_t node = 0;
  std::vector<Vec> vertices;
};

struct RadiusRecord {
  std::string atom;
  std::size_t node = 0;
  double radius = 0.0;
};

struct LocalSpec {
  std::vector<std::size_t> nodes;
  std::vector<Record> values;
};

struct WitnessSpec {
  std::string mode = "shared";
  /// "psi" (F_z = Ψ), "shared" (one F for all z) or "per-node".
  std::string locals = "psi";
  std::vector<Record> shared;
  std::vector<LocalSpec> per_node;
  std::optional<double> radius;
  std::vector<RadiusRecord> radii;
  std::optional<std::pair<Vec, Vec>> bound;
};

struct PlayerSpec {
  std::string name;
  GridSpec grid;
  bool concave = false;
};

/// quadratic: u_i(ω,x) = −(x_i − a_i(ω) − Σ_{j≠i} b_ij x_j)² on one-dimensional strategies.
/// table: u[i][atom][joint node].
struct PayoffSpec {
  std::string type;
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  std::vector<std::vector<std::vector<double>>> table;
};

struct OptionsSpec {
  std::optional<double> tol;
  std::optional<double> eps;
  std::optional<double> eps_eq;
  std::optional<std::uint64_t> seed;
  std::optional<bool> closed_valued;
  std::optional<std::size_t> k_max;
  std::optional<std::size_t> restarts;
  std::optional<bool> strict_cip;
  std::optional<double> alpha;
};

struct ProblemSpec {
  std::string kind;
  std::vector<std::string> atom_labels;
  std::vector<double> atom_weights;
  std::optional<std::vector<std::vector<std::string>>> partition;
  std::optional<GridSpec> grid;
  std::optional<int> value_dim;
  /// Ψ for cip-check/select/fixpoint, P for maximal.
  std::vector<Record> psi;
  std::optional<WitnessSpec> witness;
  std::vector<PlayerSpec> players;
  std::optional<PayoffSpec> payoff;
  std::vector<std::vector<double>> priors;
  OptionsSpec options;
};

/// Byte offset → 1-based (line, column).
std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset);

json parse_json(const std::string& text);
ProblemSpec problem_from_json(const json& doc);
json problem_to_json(const ProblemSpec& p);
ProblemSpec parse_problem(const std::string& text);
/// Sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const json& doc);
std::string serialize_problem(const ProblemSpec& p);

/// key=value override: tol, eps, eps_eq, seed, mode, strict_cip, mesh, k_max, restarts, closed_valued, alpha.
void apply_override(ProblemSpec& p, const std::string& key, const std::string& value);

std::string sha256_hex(const std::string& bytes);

/// Runs the pipeline for p.kind and returns the certificate without provenance.
/// PreconditionError/DomainError propagate; NoCertificateError becomes status "no-certificate".
json run_problem(const ProblemSpec& p);

/// run_problem plus provenance {input_hash, tool_version, seed, timestamp}.
json certify(const ProblemSpec& p, const std::string& timestamp);

/// Human-readable summary: failing checks first, then passing ones; "ALL CHECKS PASSED" when ok.
std::string report(const json& certificate);

}  // namespace carasel::io
