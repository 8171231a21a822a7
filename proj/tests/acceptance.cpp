// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "carasel/corr.hpp"
#include "carasel/equilibria.hpp"
#include "carasel/io.hpp"
#include "carasel/selection.hpp"
#include "carasel/setops.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace carasel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return std::string(CARASEL_FIXTURE_DIR) + "/" + name; }

/// Collects failures for one criterion.
struct Verdict {
  int failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first = what;
  }
};

std::shared_ptr<const Corr> spike_example(const std::shared_ptr<const AtomSpace>& space,
                                       const std::shared_ptr<const GridSpace>& grid) {
  return std::make_shared<const Corr>(Corr::from_function(space, grid, 1, [&](std::size_t, std::size_t z) {
    if (std::abs(grid->point(z)[0]) < 1e-12) {
      std::vector<Vec> pts;
      for (int k = 0; k <= 10; ++k) pts.push_back(make_vec({0.1 * k}));
      return PointSet(1, pts);
    }
    return PointSet::of({{0.0}});
  }));
}

std::string criterion1(Verdict& v) {
  const auto t0 = Clock::now();
  auto space = std::make_shared<const AtomSpace>(AtomSpace::uniform(4));
  auto grid = std::make_shared<const GridSpace>(GridSpace::uniform(-1.0, 1.0, 21));
  auto psi = spike_example(space, grid);
  const auto part = InfoPartition::finest(space);
  const std::size_t z0 = grid->nearest(make_vec({0.0}));
  for (std::size_t t = 0; t < 4; ++t) {
    const auto r = lsc_check(*psi, t, 0.1);
    v.expect(!r.ok, "lsc_check passed at atom " + std::to_string(t));
    bool witness_one = false;
    for (const auto& viol : r.violations)
      witness_one = witness_one || (viol.z == z0 && std::abs(viol.witness[0] - 1.0) < 1e-12);
    v.expect(witness_one, "no violation at z=0 with witness point 1");
  }
  auto zero = std::make_shared<const Corr>(
      Corr::from_function(space, grid, 1, [](std::size_t, std::size_t) { return PointSet::of({{0.0}}); }));
  const auto w = shared_witness(*psi, zero, grid->diameter());
  v.expect(cip_verify(*psi, w, 0.1).ok, "cip_verify failed under F ≡ {0}");
  const auto sel = caratheodory_select(*psi, w, part);
  double membership = -1;
  for (const auto& c : sel.selection.checks)
    if (c.name == "membership") membership = c.residual;
  v.expect(sel.selection.ok(), "selection certificate failed");
  v.expect(membership == 0.0, "membership residual " + format_number(membership));
  v.expect(sel.selection.modulus == 0.0, "modulus " + format_number(sel.selection.modulus));
  const auto cert = io::certify(io::parse_problem(read_text(fixture("example-3-2.json"))), "t");
  v.expect(cert.at("status") == "ok", "fixture certificate status");
  for (const auto& rec : cert.at("outputs").at("psi")) v.expect(rec.at("value")[0].get<double>() == 0.0, "fixture ψ not zero");
  const double secs = seconds_since(t0);
  v.expect(secs < 1.0, "runtime " + format_number(secs) + " s");
  return "runtime " + format_number(secs) + " s";
}

std::string criterion2(Verdict& v) {
  std::mt19937_64 rng(2);
  double worst_inf = 0, worst_tri = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = static_cast<int>(gen::pick(rng, 1, 3));
    const auto a = gen::random_point_set(rng, dim, 8);
    const auto b = gen::random_point_set(rng, dim, 8);
    const auto c = gen::random_point_set(rng, dim, 8);
    const double hab = hausdorff_dist(a, b);
    v.expect(hab == hausdorff_dist(b, a), "asymmetric");
    v.expect(std::abs(hab - oracle::hausdorff_sup(a.points(), b.points())) <= 1e-12, "sup form disagrees with enumeration");
    std::vector<Vec> shuffled = a.points();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    v.expect(hausdorff_dist(a, PointSet(dim, shuffled)) == 0.0, "H(A, A) != 0");
    v.expect((hab <= 1e-12) == same_points(a, b, 1e-12), "identity of indiscernibles");
    const double tri = hausdorff_dist(a, c) - hab - hausdorff_dist(b, c);
    worst_tri = std::max(worst_tri, tri);
    v.expect(tri <= 1e-9, "triangle inequality");
    const double inf_eps = oracle::hausdorff_inf_eps(
        [&](double e) { return eps_neighborhood_contains(a, b, e) && eps_neighborhood_contains(b, a, e); }, 1.0);
    worst_inf = std::max(worst_inf, std::abs(inf_eps - hab));
    v.expect(std::abs(inf_eps - hab) <= 1e-9, "inf-eps form disagrees");
  }
  return "max |sup − inf-eps| " + format_number(worst_inf) + ", max triangle excess " + format_number(worst_tri);
}

std::vector<gen::CipInstance> cip_instances() {
  std::mt19937_64 rng(3);
  std::vector<gen::CipInstance> out;
  for (int k = 0; k < 100; ++k) out.push_back(gen::random_cip_instance(rng));
  return out;
}

double check_residual(const std::vector<Check>& checks, const std::string& name, bool* pass) {
  for (const auto& c : checks)
    if (c.name == name) {
      if (pass) *pass = c.pass;
      return c.residual;
    }
  if (pass) *pass = false;
  return std::nan("");
}

std::string criterion3(Verdict& v, const std::vector<gen::CipInstance>& insts) {
  const auto t0 = Clock::now();
  double worst_a = 0;
  int kernel_nodes = 0;
  for (std::size_t k = 0; k < insts.size(); ++k) {
    const auto& inst = insts[k];
    const std::string id = "instance " + std::to_string(k) + ": ";
    v.expect(cip_verify(*inst.psi, inst.witness, inst.eps).ok, id + "cip_verify failed");
    const auto r = construct_phi(*inst.psi, inst.witness, *inst.part, inst.eps);
    bool pa = false, pb = false, pc = false, pd = false, pe = false;
    worst_a = std::max(worst_a, check_residual(r.certificate, "phi.A inclusion", &pa));
    const double b = check_residual(r.certificate, "phi.B domain", &pb);
    check_residual(r.certificate, "phi.C lsc", &pc);
    check_residual(r.certificate, "phi.D measurability", &pd);
    check_residual(r.certificate, "phi.E interiority", &pe);
    v.expect(pa, id + "(A) failed");
    v.expect(pb && b == 0.0, id + "(B) failed");
    v.expect(pc, id + "(C) failed");
    v.expect(pd, id + "(D) failed");
    v.expect(pe, id + "(E) failed");
    // (A) and (E) again from the raw tables with independent routines.
    const auto kern = k_operator(*inst.psi, inst.witness);
    const std::size_t n = inst.psi->nodes();
    for (std::size_t t = 0; t < inst.psi->atoms(); ++t)
      for (std::size_t x = 0; x < n; ++x) {
        v.expect(r.phi.nonempty(t, x) == inst.psi->nonempty(t, x), id + "domain mismatch");
        if (!r.phi.nonempty(t, x)) continue;
        for (const auto& p : r.phi.at(t, x).points())
          v.expect(oracle::hull_distance(p, inst.psi->at(t, x).points()) <= 1e-9, id + "Φ vertex outside con Ψ");
        if (kern.nonempty(t, x)) {
          ++kernel_nodes;
          v.expect(max_interior_margin(ConvexSet(r.phi.at(t, x))) > 0, id + "zero margin where 𝕂 ≠ ∅");
        }
      }
  }
  const double secs = seconds_since(t0);
  v.expect(secs < 30.0, "runtime " + format_number(secs) + " s");
  return "max (A) residual " + format_number(worst_a) + ", 𝕂 ≠ ∅ at " + std::to_string(kernel_nodes) + " nodes, " +
         format_number(secs) + " s";
}

std::string criterion4(Verdict& v, const std::vector<gen::CipInstance>& insts) {
  double worst = 0, worst_modulus = 0;
  for (std::size_t k = 0; k < insts.size(); ++k) {
    const auto& inst = insts[k];
    const std::string id = "instance " + std::to_string(k) + ": ";
    SelectOptions opts;
    opts.eps = inst.eps;
    opts.seed = k;
    const auto r = caratheodory_select(*inst.psi, inst.witness, *inst.part, opts);
    v.expect(r.selection.ok(), id + "selection certificate failed");
    v.expect(std::isfinite(r.selection.modulus), id + "modulus not finite");
    worst_modulus = std::max(worst_modulus, r.selection.modulus);
    for (std::size_t t = 0; t < inst.psi->atoms(); ++t)
      for (std::size_t z = 0; z < inst.psi->nodes(); ++z) {
        v.expect(r.selection.defined(t, z) == inst.psi->nonempty(t, z), id + "selection domain differs from U_Ψ");
        if (!r.selection.defined(t, z)) continue;
        const double d = oracle::hull_distance(r.selection.at(t, z), inst.psi->at(t, z).points());
        worst = std::max(worst, d);
        v.expect(d <= 1e-7, id + "ψ outside con Ψ by " + format_number(d));
      }
  }
  std::mt19937_64 rng(4);
  double worst_trunc = 0;
  for (int k = 0; k < 50; ++k) {
    const int dim = static_cast<int>(gen::pick(rng, 1, 3));
    const auto verts = gen::random_polytope(rng, dim);
    std::vector<Vec> dense;
    for (int m = 0; m < 12; ++m) dense.push_back(gen::random_convex_combination(rng, verts));
    const ConvexSet b(dim, verts);
    const double diff = (interior_series(b, dense, 40) - interior_series(b, dense, 80)).norm();
    worst_trunc = std::max(worst_trunc, diff);
    v.expect(diff <= 1e-10, "truncation difference " + format_number(diff));
  }
  std::vector<Vec> dense = {make_vec({0.0}), make_vec({1.0})};
  for (int k = 1; dense.size() < 41; ++k) dense.push_back(make_vec({std::ldexp(1.0, -k)}));
  const double z = interior_series(ConvexSet(1, {make_vec({0.0}), make_vec({1.0})}), dense, 40)[0];
  v.expect(std::abs(z - 2.0 / 3.0) <= 1e-9, "[0,1] series gives " + format_number(z));
  return "max membership distance " + format_number(worst) + ", max modulus " + format_number(worst_modulus) +
         ", max truncation gap " + format_number(worst_trunc) + ", [0,1] series " + format_number(z);
}

std::string criterion5(Verdict& v) {
  std::mt19937_64 rng(5);
  double worst_res = 0, worst_dist = 0;
  for (int k = 0; k < 50; ++k) {
    const auto inst = gen::random_contraction(rng);
    const auto part = InfoPartition::finest(inst.space);
    const auto fp = random_fixed_point(*inst.psi, canonical_witness(inst.psi), part);
    v.expect(fp.ok(), "fixed-point certificate failed");
    for (std::size_t t = 0; t < inst.fixed.size(); ++t) {
      worst_res = std::max(worst_res, fp.residuals[t]);
      const double d = (fp.values[t] - inst.fixed[t]).norm();
      worst_dist = std::max(worst_dist, d / inst.grid->mesh());
      v.expect(fp.residuals[t] <= 1e-6, "residual " + format_number(fp.residuals[t]));
      v.expect(d <= inst.grid->mesh(), "distance to analytic fixed point " + format_number(d));
    }
  }
  auto space = std::make_shared<const AtomSpace>(AtomSpace::uniform(2));
  auto grid = std::make_shared<const GridSpace>(GridSpace::uniform(0.0, 1.0, 101));
  auto psi = std::make_shared<const Corr>(Corr::from_function(
      space, grid, 1, [&](std::size_t, std::size_t z) { return PointSet(1, {make_vec({1.0 - grid->point(z)[0]})}); }));
  const auto fp = random_fixed_point(*psi, canonical_witness(psi), InfoPartition::finest(space));
  for (const auto& x : fp.values) v.expect(std::abs(x[0] - 0.5) <= 0.01, "1 − x gives " + format_number(x[0]));
  return "max residual " + format_number(worst_res) + ", max distance/h " + format_number(worst_dist) + ", 1 − x → " +
         format_number(fp.values[0][0]);
}

oracle::BruteForceProfile oracle_for(const GameSpec& g) {
  const JointGrid joint(g.strategy_grids);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < joint.players(); ++i) sizes.push_back(joint.player_grid(i).size());
  // Enumerate joint nodes as (x_1 slowest, ..., x_P fastest), matching the index order the library promises.
  auto decode = [&](std::size_t x) {
    std::vector<std::size_t> c(sizes.size());
    for (std::size_t i = sizes.size(); i-- > 0;) {
      c[i] = x % sizes[i];
      x /= sizes[i];
    }
    return c;
  };
  auto encode = [&](const std::vector<std::size_t>& c) {
    std::size_t x = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) x = x * sizes[i] + c[i];
    return x;
  };
  auto point = [&](std::size_t x) {
    const auto c = decode(x);
    std::vector<double> v;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Vec& p = joint.player_grid(i).point(c[i]);
      v.insert(v.end(), p.data(), p.data() + p.size());
    }
    return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  std::size_t total = 1;
  for (auto s : sizes) total *= s;
  return oracle::brute_force_equilibrium(
      g.space->size(), sizes.size(), total, sizes,
      [&](std::size_t i, std::size_t t, std::size_t x) { return g.payoff(i, t, point(x)); },
      [&](std::size_t x, std::size_t i, std::size_t y) {
        auto c = decode(x);
        c[i] = y;
        return encode(c);
      });
}

std::string criterion6(Verdict& v) {
  std::mt19937_64 rng(6);
  double worst_ratio = 0;
  for (int k = 0; k < 30; ++k) {
    const auto q = gen::random_quadratic_game(rng);
    const auto part = InfoPartition::finest(q.game.space);
    const auto cert = random_nash(q.game, part, q.eps_eq);
    const auto ref = oracle_for(q.game);
    v.expect(cert.ok(), "game " + std::to_string(k) + ": certificate failed");
    for (std::size_t t = 0; t < 4; ++t) {
      v.expect(cert.profile[t] == ref.nodes[t], "game " + std::to_string(k) + ": profile differs from enumeration");
      for (double r : cert.regret[t]) {
        v.expect(r <= q.eps_eq, "regret above eps_eq");
        worst_ratio = std::max(worst_ratio, r / q.eps_eq);
      }
    }
  }
  auto q = gen::random_quadratic_game(rng);
  q.b = {0.0, 0.0};
  q.game.payoff = [a = q.a](std::size_t i, std::size_t t, const Vec& x) {
    const double d = x[static_cast<Eigen::Index>(i)] - a[i][t];
    return -d * d;
  };
  const auto cert = random_nash(q.game, InfoPartition::finest(q.game.space), 2 * 0.05 + 1e-9);
  const auto& grid = *q.game.strategy_grids[0];
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < 2; ++i) {
      const double nearest = grid.point(grid.nearest(make_vec({q.a[i][t]})))[0];
      v.expect(cert.profile_values[t][static_cast<Eigen::Index>(i)] == nearest, "independent game: not the nearest node");
    }
  return "max regret/eps_eq " + format_number(worst_ratio);
}

std::string criterion7(Verdict& v) {
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t atoms = gen::pick(rng, 2, 6);
    std::vector<double> w(atoms);
    for (auto& x : w) x = gen::uniform(rng, 0.1, 1.0);
    std::vector<std::string> labels;
    for (std::size_t t = 0; t < atoms; ++t) labels.push_back("s" + std::to_string(t));
    auto space = std::make_shared<const AtomSpace>(labels, w);
    const std::size_t ncells = gen::pick(rng, 1, atoms);
    std::vector<std::vector<std::size_t>> cells(ncells);
    for (std::size_t t = 0; t < atoms; ++t) cells[t < ncells ? t : gen::pick(rng, 0, ncells - 1)].push_back(t);
    for (auto& c : cells) std::sort(c.begin(), c.end());
    auto part = std::make_shared<const InfoPartition>(space, cells);
    std::vector<double> q(atoms);
    double mass = 0;
    for (std::size_t t = 0; t < atoms; ++t) mass += (q[t] = gen::uniform(rng, 0.2, 2.0)) * w[t];
    for (auto& x : q) x /= mass;
    std::vector<std::vector<double>> table(atoms, std::vector<double>(3));
    for (auto& row : table)
      for (auto& x : row) x = gen::uniform(rng, -5, 5);
    auto grid = std::make_shared<const GridSpace>(GridSpace::uniform(0.0, 1.0, 3));
    GameSpec g{space, {"p"}, {grid}, [table, grid](std::size_t, std::size_t t, const Vec& x) {
                 return table[t][grid->nearest(x)];
               }, {true}};
    BayesSpec b{g, part, {Prior(space, q)}};
    for (std::size_t omega = 0; omega < atoms; ++omega)
      for (std::size_t x = 0; x < 3; ++x) {
        long double num = 0, den = 0;
        for (std::size_t s : part->cell_containing(omega)) {
          num += static_cast<long double>(q[s]) * w[s] * table[s][x];
          den += static_cast<long double>(q[s]) * w[s];
        }
        const double ref = static_cast<double>(num / den);
        const double h = bayes_h(b, 0, omega, grid->point(x));
        worst = std::max(worst, std::abs(h - ref));
        v.expect(std::abs(h - ref) <= 1e-12, "bayes_h differs from the weighted sum");
        const double h0 = bayes_h(b, 0, part->cell_containing(omega).front(), grid->point(x));
        v.expect(std::abs(h - h0) <= 1e-12, "bayes_h differs within a cell");
      }
  }
  for (int k = 0; k < 5; ++k) {
    const auto qg = gen::random_quadratic_game(rng);
    auto finest = std::make_shared<const InfoPartition>(InfoPartition::finest(qg.game.space));
    const auto a = random_nash(qg.game, *finest, qg.eps_eq);
    const auto b = bayes_equilibrium(BayesSpec{qg.game, finest, {Prior::uniform(qg.game.space), Prior::uniform(qg.game.space)}},
                                     qg.eps_eq);
    bool same = a.profile == b.profile && a.regret == b.regret && a.checks.size() == b.checks.size() &&
                a.warnings == b.warnings;
    for (std::size_t c = 0; same && c < a.checks.size(); ++c)
      same = a.checks[c].name == b.checks[c].name && a.checks[c].residual == b.checks[c].residual &&
             a.checks[c].pass == b.checks[c].pass && a.checks[c].detail == b.checks[c].detail;
    v.expect(same, "singleton cells: bayes_equilibrium and random_nash certificates differ");
  }
  const auto p = io::parse_problem(read_text(fixture("quadratic-bayes.json")));
  const auto cert = io::certify(p, "t");
  v.expect(cert.at("status") == "ok", "quadratic-bayes fixture status");
  // Mean minimizer by enumeration: argmin over nodes of Σ_t μ q (x − a_t)².
  const std::vector<double> mu = p.atom_weights;
  for (std::size_t i = 0; i < 2; ++i) {
    double best = 1e300, arg = -1;
    for (int n = 0; n <= 20; ++n) {
      const double x = n / 20.0;
      double s = 0, m = 0;
      for (std::size_t t = 0; t < mu.size(); ++t) {
        s += mu[t] * p.priors[i][t] * (x - p.payoff->a[i][t]) * (x - p.payoff->a[i][t]);
        m += mu[t] * p.priors[i][t];
      }
      if (s / m < best - 1e-12) {
        best = s / m;
        arg = x;
      }
    }
    for (const auto& e : cert.at("outputs").at("profile"))
      v.expect(std::abs(e.at("value")[i].get<double>() - arg) < 1e-12, "fixture profile is not the mean minimizer");
  }
  return "max |bayes_h − reference| " + format_number(worst);
}

std::string criterion8(Verdict& v) {
  auto space = std::make_shared<const AtomSpace>(AtomSpace::uniform(3));
  auto grid = std::make_shared<const GridSpace>(GridSpace::uniform(0.0, 1.0, 21));
  const double eps_eq = 0.01;
  auto chain = std::make_shared<const Corr>(Corr::from_function(space, grid, 1, [&](std::size_t, std::size_t x) {
    std::vector<Vec> up;
    for (std::size_t y = 0; y < grid->size(); ++y)
      if (grid->point(y)[0] > grid->point(x)[0] + eps_eq) up.push_back(grid->point(y));
    return PointSet(1, up);
  }));
  const auto part = InfoPartition::finest(space);
  const auto top = maximal_element(*chain, canonical_witness(chain), part, eps_eq);
  v.expect(top.ok(), "chain certificate failed");
  for (std::size_t t = 0; t < 3; ++t) v.expect(top.nodes[t] == 20, "chain: not the top node");

  std::mt19937_64 rng(8);
  for (int k = 0; k < 30; ++k) {
    const auto up = gen::random_utility_preference(rng);
    const auto r = maximal_element(*up.pref, canonical_witness(up.pref), InfoPartition::finest(up.space), 0.0);
    v.expect(r.ok(), "utility preference " + std::to_string(k) + ": certificate failed");
    for (std::size_t t = 0; t < up.space->size(); ++t) {
      std::size_t arg = 0;
      for (std::size_t x = 1; x < up.grid->size(); ++x)
        if (up.u(t, up.grid->point(x)) > up.u(t, up.grid->point(arg))) arg = x;
      v.expect(r.nodes[t] == arg, "utility preference " + std::to_string(k) + ": not the grid argmax");
    }
  }
  return "chain → node 20, 30 utility preferences checked";
}

std::string criterion9(Verdict& v) {
  int fixtures = 0;
  for (const char* name : {"example-3-2.json", "lsc-canonical.json", "quadratic-bayes.json"}) {
    const std::string text = read_text(fixture(name));
    const auto p = io::parse_problem(text);
    const std::string s1 = io::serialize_problem(p);
    const std::string s2 = io::serialize_problem(io::parse_problem(s1));
    v.expect(s1 == s2, std::string(name) + ": serialization is not idempotent");
    setenv("CARASEL_THREADS", "1", 1);
    const std::string c1 = io::canonical_dump(io::certify(p, "fixed"));
    setenv("CARASEL_THREADS", "4", 1);
    const std::string c2 = io::canonical_dump(io::certify(io::parse_problem(s1), "fixed"));
    unsetenv("CARASEL_THREADS");
    v.expect(c1 == c2, std::string(name) + ": certificates differ between runs");
    ++fixtures;
  }
  return std::to_string(fixtures) + " fixtures";
}

}  // namespace

int main() {
  int failed = 0;
  auto run = [&](int id, const std::function<std::string(Verdict&)>& body) {
    Verdict v;
    std::string info;
    try {
      info = body(v);
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = v.failures == 0;
    failed += ok ? 0 : 1;
    std::printf("criterion %d: %s  %s%s\n", id, ok ? "PASS" : "FAIL", info.c_str(),
                ok ? "" : ("  [" + std::to_string(v.failures) + " failures; first: " + v.first + "]").c_str());
    std::fflush(stdout);
  };
  run(1, criterion1);
  run(2, criterion2);
  const auto insts = cip_instances();
  run(3, [&](Verdict& v) { return criterion3(v, insts); });
  run(4, [&](Verdict& v) { return criterion4(v, insts); });
  run(5, criterion5);
  run(6, criterion6);
  run(7, criterion7);
  run(8, criterion8);
  run(9, criterion9);
  return failed == 0 ? 0 : 1;
}
