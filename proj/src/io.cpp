#include "carasel/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "carasel/check.hpp"
#include "carasel/corr.hpp"
#include "carasel/equilibria.hpp"
#include "carasel/measure.hpp"
#include "carasel/selection.hpp"

namespace carasel::io {

namespace {

const std::set<std::string> kKinds = {"cip-check", "select", "fixpoint", "nash", "bayes", "maximal"};

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
  throw ParseError("schema error at " + (path.empty() ? std::string("/") : path) + ": " + msg);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) schema(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      schema(path + "/" + k, "unknown key");
  }
}

const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) schema(path + "/" + key, "required");
  return obj.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0)) schema(path, "expected a positive number");
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) schema(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema(path, "expected a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) schema(path, "expected true or false");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array");
  return j;
}

Vec vec(const json& j, const std::string& path) {
  array(j, path);
  if (j.empty()) schema(path, "expected a nonempty number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(j[k], path + "/" + std::to_string(k));
  return v;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  array(j, path);
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "/" + std::to_string(k)));
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

GridSpec grid_from(const json& j, const std::string& path) {
  GridSpec g;
  allow_keys(j, path, {"box", "points", "mesh", "adjacency_radius"});
  if (j.contains("box") == j.contains("points")) schema(path, "exactly one of box or points is required");
  if (j.contains("box")) {
    const auto& b = j.at("box");
    const std::string bp = path + "/box";
    allow_keys(b, bp, {"lo", "hi", "counts"});
    g.is_box = true;
    g.lo = vec(need(b, "lo", bp), bp + "/lo");
    g.hi = vec(need(b, "hi", bp), bp + "/hi");
    const auto& c = array(need(b, "counts", bp), bp + "/counts");
    for (std::size_t k = 0; k < c.size(); ++k) {
      const std::size_t n = count(c[k], bp + "/counts/" + std::to_string(k));
      if (n == 0) schema(bp + "/counts/" + std::to_string(k), "counts must be positive");
      g.counts.push_back(n);
    }
    if (g.lo.size() != g.hi.size() || g.counts.size() != static_cast<std::size_t>(g.lo.size()))
      schema(bp, "lo, hi and counts must have the same length");
    for (Eigen::Index k = 0; k < g.lo.size(); ++k)
      if (!(g.hi[k] > g.lo[k]) && g.counts[static_cast<std::size_t>(k)] > 1) schema(bp, "hi must exceed lo");
  } else {
    const auto& pts = array(j.at("points"), path + "/points");
    if (pts.empty()) schema(path + "/points", "expected at least one point");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      g.points.push_back(vec(pts[k], path + "/points/" + std::to_string(k)));
      if (g.points.back().size() != g.points.front().size()) schema(path + "/points/" + std::to_string(k), "dimension mismatch");
    }
  }
  if (j.contains("mesh")) g.mesh = positive(j.at("mesh"), path + "/mesh");
  if (j.contains("adjacency_radius")) g.adjacency_radius = positive(j.at("adjacency_radius"), path + "/adjacency_radius");
  return g;
}

json grid_json(const GridSpec& g) {
  json j;
  if (g.is_box) {
    j["box"] = {{"lo", vec_json(g.lo)}, {"hi", vec_json(g.hi)}, {"counts", g.counts}};
  } else {
    json pts = json::array();
    for (const auto& p : g.points) pts.push_back(vec_json(p));
    j["points"] = pts;
  }
  if (g.mesh) j["mesh"] = *g.mesh;
  if (g.adjacency_radius) j["adjacency_radius"] = *g.adjacency_radius;
  return j;
}

std::vector<Record> records_from(const json& j, const std::string& path) {
  array(j, path);
  std::vector<Record> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string rp = path + "/" + std::to_string(k);
    allow_keys(j[k], rp, {"atom", "node", "vertices"});
    Record r;
    r.atom = text(need(j[k], "atom", rp), rp + "/atom");
    r.node = count(need(j[k], "node", rp), rp + "/node");
    const auto& vs = array(need(j[k], "vertices", rp), rp + "/vertices");
    for (std::size_t m = 0; m < vs.size(); ++m) r.vertices.push_back(vec(vs[m], rp + "/vertices/" + std::to_string(m)));
    out.push_back(std::move(r));
  }
  return out;
}

json records_json(const std::vector<Record>& rs) {
  json a = json::array();
  for (const auto& r : rs) {
    json vs = json::array();
    for (const auto& v : r.vertices) vs.push_back(vec_json(v));
    a.push_back({{"atom", r.atom}, {"node", r.node}, {"vertices", vs}});
  }
  return a;
}

WitnessSpec witness_from(const json& j, const std::string& path) {
  allow_keys(j, path, {"mode", "locals", "radius", "radii", "bound"});
  WitnessSpec w;
  if (j.contains("mode")) {
    w.mode = text(j.at("mode"), path + "/mode");
    try {
      cip_mode_from_string(w.mode);
    } catch (const Error&) {
      schema(path + "/mode", "expected atomic, shared, countable or indexed");
    }
  }
  if (j.contains("locals")) {
    const auto& l = j.at("locals");
    const std::string lp = path + "/locals";
    if (l.is_string()) {
      if (l.get<std::string>() != "psi") schema(lp, "expected \"psi\", {shared: ...} or a list of {nodes, values}");
      w.locals = "psi";
    } else if (l.is_object()) {
      allow_keys(l, lp, {"shared"});
      w.locals = "shared";
      w.shared = records_from(need(l, "shared", lp), lp + "/shared");
    } else if (l.is_array()) {
      w.locals = "per-node";
      for (std::size_t k = 0; k < l.size(); ++k) {
        const std::string ep = lp + "/" + std::to_string(k);
        allow_keys(l[k], ep, {"nodes", "values"});
        LocalSpec s;
        const auto& ns = array(need(l[k], "nodes", ep), ep + "/nodes");
        for (std::size_t m = 0; m < ns.size(); ++m) s.nodes.push_back(count(ns[m], ep + "/nodes/" + std::to_string(m)));
        s.values = records_from(need(l[k], "values", ep), ep + "/values");
        w.per_node.push_back(std::move(s));
      }
    } else {
      schema(lp, "expected \"psi\", {shared: ...} or a list of {nodes, values}");
    }
  }
  if (j.contains("radius") && j.contains("radii")) schema(path, "radius and radii are exclusive");
  if (j.contains("radius")) w.radius = positive(j.at("radius"), path + "/radius");
  if (j.contains("radii")) {
    const auto& rs = array(j.at("radii"), path + "/radii");
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const std::string rp = path + "/radii/" + std::to_string(k);
      allow_keys(rs[k], rp, {"atom", "node", "radius"});
      w.radii.push_back({text(need(rs[k], "atom", rp), rp + "/atom"), count(need(rs[k], "node", rp), rp + "/node"),
                         positive(need(rs[k], "radius", rp), rp + "/radius")});
    }
  }
  if (j.contains("bound")) {
    const auto& b = j.at("bound");
    allow_keys(b, path + "/bound", {"lo", "hi"});
    w.bound = std::make_pair(vec(need(b, "lo", path + "/bound"), path + "/bound/lo"),
                             vec(need(b, "hi", path + "/bound"), path + "/bound/hi"));
  }
  return w;
}

json witness_json(const WitnessSpec& w) {
  json j;
  j["mode"] = w.mode;
  if (w.locals == "psi") {
    j["locals"] = "psi";
  } else if (w.locals == "shared") {
    j["locals"] = {{"shared", records_json(w.shared)}};
  } else {
    json a = json::array();
    for (const auto& s : w.per_node) a.push_back({{"nodes", s.nodes}, {"values", records_json(s.values)}});
    j["locals"] = a;
  }
  if (w.radius) j["radius"] = *w.radius;
  if (!w.radii.empty()) {
    json a = json::array();
    for (const auto& r : w.radii) a.push_back({{"atom", r.atom}, {"node", r.node}, {"radius", r.radius}});
    j["radii"] = a;
  }
  if (w.bound) j["bound"] = {{"lo", vec_json(w.bound->first)}, {"hi", vec_json(w.bound->second)}};
  return j;
}

OptionsSpec options_from(const json& j, const std::string& path) {
  allow_keys(j, path, {"tol", "eps", "eps_eq", "seed", "closed_valued", "k_max", "restarts", "strict_cip", "alpha"});
  OptionsSpec o;
  if (j.contains("tol")) o.tol = positive(j.at("tol"), path + "/tol");
  if (j.contains("eps")) o.eps = positive(j.at("eps"), path + "/eps");
  if (j.contains("eps_eq")) o.eps_eq = positive(j.at("eps_eq"), path + "/eps_eq");
  if (j.contains("seed")) o.seed = static_cast<std::uint64_t>(count(j.at("seed"), path + "/seed"));
  if (j.contains("closed_valued")) o.closed_valued = boolean(j.at("closed_valued"), path + "/closed_valued");
  if (j.contains("k_max")) {
    o.k_max = count(j.at("k_max"), path + "/k_max");
    if (*o.k_max == 0) schema(path + "/k_max", "must be positive");
  }
  if (j.contains("restarts")) o.restarts = count(j.at("restarts"), path + "/restarts");
  if (j.contains("strict_cip")) o.strict_cip = boolean(j.at("strict_cip"), path + "/strict_cip");
  if (j.contains("alpha")) {
    o.alpha = positive(j.at("alpha"), path + "/alpha");
    if (*o.alpha > 1) schema(path + "/alpha", "must lie in (0, 1]");
  }
  return o;
}

json options_json(const OptionsSpec& o) {
  json j = json::object();
  if (o.tol) j["tol"] = *o.tol;
  if (o.eps) j["eps"] = *o.eps;
  if (o.eps_eq) j["eps_eq"] = *o.eps_eq;
  if (o.seed) j["seed"] = *o.seed;
  if (o.closed_valued) j["closed_valued"] = *o.closed_valued;
  if (o.k_max) j["k_max"] = *o.k_max;
  if (o.restarts) j["restarts"] = *o.restarts;
  if (o.strict_cip) j["strict_cip"] = *o.strict_cip;
  if (o.alpha) j["alpha"] = *o.alpha;
  return j;
}

PayoffSpec payoff_from(const json& j, const std::string& path) {
  allow_keys(j, path, {"type", "a", "b", "u"});
  PayoffSpec p;
  p.type = text(need(j, "type", path), path + "/type");
  if (p.type == "quadratic") {
    const auto& a = array(need(j, "a", path), path + "/a");
    for (std::size_t i = 0; i < a.size(); ++i) p.a.push_back(numbers(a[i], path + "/a/" + std::to_string(i)));
    if (j.contains("b")) {
      const auto& b = array(j.at("b"), path + "/b");
      for (std::size_t i = 0; i < b.size(); ++i) p.b.push_back(numbers(b[i], path + "/b/" + std::to_string(i)));
    }
    if (j.contains("u")) schema(path + "/u", "only for type table");
  } else if (p.type == "table") {
    const auto& u = array(need(j, "u", path), path + "/u");
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& ui = array(u[i], path + "/u/" + std::to_string(i));
      std::vector<std::vector<double>> rows;
      for (std::size_t t = 0; t < ui.size(); ++t)
        rows.push_back(numbers(ui[t], path + "/u/" + std::to_string(i) + "/" + std::to_string(t)));
      p.table.push_back(std::move(rows));
    }
    if (j.contains("a") || j.contains("b")) schema(path, "a and b are only for type quadratic");
  } else {
    schema(path + "/type", "expected quadratic or table");
  }
  return p;
}

json payoff_json(const PayoffSpec& p) {
  json j;
  j["type"] = p.type;
  if (p.type == "quadratic") {
    j["a"] = p.a;
    if (!p.b.empty()) j["b"] = p.b;
  } else {
    j["u"] = p.table;
  }
  return j;
}

// ---- building library objects ----

std::shared_ptr<const GridSpace> build_grid(const GridSpec& g) {
  if (g.is_box) {
    auto space = GridSpace::box(g.lo, g.hi, g.counts, g.adjacency_radius ? g.adjacency_radius
                                                      : g.mesh                 ? std::optional<double>(2.0 * *g.mesh)
                                                                               : std::nullopt);
    return std::make_shared<const GridSpace>(std::move(space));
  }
  return std::make_shared<const GridSpace>(GridSpace(g.points, g.mesh, g.adjacency_radius));
}

struct Context {
  std::shared_ptr<const AtomSpace> space;
  std::shared_ptr<const InfoPartition> part;
};

Context build_context(const ProblemSpec& p) {
  Context c;
  c.space = std::make_shared<const AtomSpace>(p.atom_labels, p.atom_weights);
  if (p.partition) {
    std::vector<std::vector<std::size_t>> cells;
    for (const auto& cell : *p.partition) {
      std::vector<std::size_t> ids;
      for (const auto& l : cell) ids.push_back(c.space->index_of(l));
      cells.push_back(std::move(ids));
    }
    c.part = std::make_shared<const InfoPartition>(c.space, std::move(cells));
  } else {
    c.part = std::make_shared<const InfoPartition>(InfoPartition::finest(c.space));
  }
  return c;
}

std::shared_ptr<const Corr> build_corr(const std::vector<Record>& rs, const Context& c,
                                       const std::shared_ptr<const GridSpace>& grid, int dim, const std::string& what) {
  const std::size_t n = grid->size();
  std::vector<PointSet> values(c.space->size() * n, PointSet(dim));
  std::vector<bool> seen(values.size(), false);
  for (const auto& r : rs) {
    const std::size_t t = c.space->index_of(r.atom);
    if (r.node >= n) throw DomainError(what + ": node " + std::to_string(r.node) + " is outside the grid");
    if (seen[t * n + r.node])
      throw DomainError(what + ": duplicate record for atom " + r.atom + ", node " + std::to_string(r.node));
    seen[t * n + r.node] = true;
    for (const auto& v : r.vertices)
      if (v.size() != dim) throw DomainError(what + ": vertex dimension differs from value_dim");
    values[t * n + r.node] = PointSet(dim, r.vertices);
  }
  return std::make_shared<const Corr>(c.space, grid, dim, std::move(values));
}

CipWitness build_witness(const ProblemSpec& p, const Context& c, const std::shared_ptr<const Corr>& psi) {
  const WitnessSpec w = p.witness.value_or(WitnessSpec{});
  const std::size_t n = psi->nodes();
  CipWitness out = canonical_witness(psi, cip_mode_from_string(w.mode));
  if (w.locals == "shared") {
    auto f = build_corr(w.shared, c, psi->grid_ptr(), psi->value_dim(), "witness shared local");
    out.locals.assign(n, f);
  } else if (w.locals == "per-node") {
    for (const auto& s : w.per_node) {
      auto f = build_corr(s.values, c, psi->grid_ptr(), psi->value_dim(), "witness local");
      for (std::size_t z : s.nodes) {
        if (z >= n) throw DomainError("witness local: node " + std::to_string(z) + " is outside the grid");
        out.locals[z] = f;
      }
    }
  }
  if (w.radius) {
    for (auto& r : out.radii)
      if (r) r = *w.radius;
  } else if (!w.radii.empty()) {
    std::fill(out.radii.begin(), out.radii.end(), std::nullopt);
    for (const auto& r : w.radii) {
      const std::size_t t = c.space->index_of(r.atom);
      if (r.node >= n) throw DomainError("witness radii: node outside the grid");
      out.radii[t * n + r.node] = r.radius;
    }
  }
  out.bound = w.bound;
  validate_witness(*psi, out);
  return out;
}

json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) {
    a.push_back({{"name", c.name},
                 {"residual", number_or_string(c.residual)},
                 {"tolerance", std::isfinite(c.tolerance) ? json(c.tolerance) : json(nullptr)},
                 {"pass", c.pass},
                 {"detail", c.detail}});
  }
  return a;
}

json selection_json(const Selection& s) {
  json a = json::array();
  for (std::size_t t = 0; t < s.space->size(); ++t)
    for (std::size_t z = 0; z < s.grid->size(); ++z)
      if (s.defined(t, z)) a.push_back({{"atom", s.space->labels()[t]}, {"node", z}, {"value", vec_json(s.at(t, z))}});
  return a;
}

SelectOptions select_options(const OptionsSpec& o, bool closed_default) {
  SelectOptions s;
  s.closed_valued = o.closed_valued.value_or(closed_default);
  if (o.tol) s.tol = *o.tol;
  s.eps = o.eps;
  if (o.k_max) s.k_max = *o.k_max;
  if (o.restarts) s.restarts = *o.restarts;
  s.seed = o.seed.value_or(0);
  s.strict_cip = o.strict_cip.value_or(false);
  return s;
}

GameSpec build_game(const ProblemSpec& p, const Context& c) {
  GameSpec g;
  g.space = c.space;
  for (const auto& pl : p.players) {
    g.players.push_back(pl.name);
    g.strategy_grids.push_back(build_grid(pl.grid));
    g.concavity_declared.push_back(pl.concave);
  }
  const std::size_t np = p.players.size();
  const std::size_t atoms = c.space->size();
  const PayoffSpec& pay = *p.payoff;
  if (pay.type == "quadratic") {
    for (const auto& gr : g.strategy_grids)
      if (gr->dim() != 1) throw DomainError("quadratic payoff: strategies must be one-dimensional");
    if (pay.a.size() != np) throw DomainError("quadratic payoff: one row of a per player expected");
    for (const auto& row : pay.a)
      if (row.size() != atoms) throw DomainError("quadratic payoff: one a value per atom expected");
    std::vector<std::vector<double>> b = pay.b.empty() ? std::vector<std::vector<double>>(np, std::vector<double>(np, 0.0)) : pay.b;
    if (b.size() != np) throw DomainError("quadratic payoff: b must be players × players");
    for (std::size_t i = 0; i < np; ++i) {
      if (b[i].size() != np) throw DomainError("quadratic payoff: b must be players × players");
      b[i][i] = 0.0;
    }
    g.payoff = [a = pay.a, b](std::size_t i, std::size_t t, const Vec& x) {
      double target = a[i][t];
      for (std::size_t j = 0; j < b.size(); ++j) target += b[i][j] * x[static_cast<Eigen::Index>(j)];
      const double d = x[static_cast<Eigen::Index>(i)] - target;
      return -d * d;
    };
  } else {
    auto joint = std::make_shared<const JointGrid>(g.strategy_grids);
    if (pay.table.size() != np) throw DomainError("table payoff: one table per player expected");
    for (const auto& ui : pay.table) {
      if (ui.size() != atoms) throw DomainError("table payoff: one row per atom expected");
      for (const auto& row : ui)
        if (row.size() != joint->size()) throw DomainError("table payoff: one value per joint node expected");
    }
    // Off-grid arguments (midpoint spot checks) are rounded to the nearest node per player.
    g.payoff = [u = pay.table, joint](std::size_t i, std::size_t t, const Vec& x) {
      std::vector<std::size_t> nodes(joint->players());
      for (std::size_t k = 0; k < joint->players(); ++k) nodes[k] = joint->player_grid(k).nearest(joint->block(x, k));
      return u[i][t][joint->encode(nodes)];
    };
  }
  return g;
}

json profile_json(const EquilibriumCertificate& cert, const AtomSpace& space, const InfoPartition& part) {
  json prof = json::array();
  for (std::size_t t = 0; t < space.size(); ++t) {
    json e = {{"atom", space.labels()[t]}, {"node", cert.profile[t]}, {"value", vec_json(cert.profile_values[t])}};
    if (!cert.regret.empty()) e["regret"] = cert.regret[t];
    prof.push_back(e);
  }
  json cells = json::array();
  for (const auto& cell : part.cells()) {
    json labels = json::array();
    for (std::size_t t : cell) labels.push_back(space.labels()[t]);
    cells.push_back(labels);
  }
  return {{"profile", prof}, {"eps_eq", cert.eps_eq}, {"measurable_wrt", cells}};
}

void require(bool cond, const std::string& path, const std::string& msg) {
  if (!cond) schema(path, msg);
}

}  // namespace

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(offset, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is the 1-based offset of the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what(),
                     line, col);
  }
}

ProblemSpec problem_from_json(const json& doc) {
  allow_keys(doc, "", {"kind", "atoms", "partition", "grid", "value_dim", "psi", "pref", "witness", "players", "payoff",
                       "priors", "options"});
  ProblemSpec p;
  p.kind = text(need(doc, "kind", ""), "/kind");
  if (!kKinds.count(p.kind)) schema("/kind", "expected one of cip-check, select, fixpoint, nash, bayes, maximal");

  const auto& atoms = array(need(doc, "atoms", ""), "/atoms");
  require(!atoms.empty(), "/atoms", "at least one atom is required");
  std::set<std::string> labels;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const std::string ap = "/atoms/" + std::to_string(k);
    allow_keys(atoms[k], ap, {"label", "weight"});
    p.atom_labels.push_back(text(need(atoms[k], "label", ap), ap + "/label"));
    p.atom_weights.push_back(positive(need(atoms[k], "weight", ap), ap + "/weight"));
    require(labels.insert(p.atom_labels.back()).second, ap + "/label", "duplicate label");
  }
  if (doc.contains("partition")) {
    const auto& cells = array(doc.at("partition"), "/partition");
    std::vector<std::vector<std::string>> out;
    std::set<std::string> covered;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::string cp = "/partition/" + std::to_string(k);
      const auto& cell = array(cells[k], cp);
      require(!cell.empty(), cp, "cells must be nonempty");
      std::vector<std::string> ls;
      for (std::size_t m = 0; m < cell.size(); ++m) {
        ls.push_back(text(cell[m], cp + "/" + std::to_string(m)));
        require(labels.count(ls.back()) > 0, cp + "/" + std::to_string(m), "unknown atom label");
        require(covered.insert(ls.back()).second, cp + "/" + std::to_string(m), "atom listed twice");
      }
      out.push_back(std::move(ls));
    }
    require(covered.size() == labels.size(), "/partition", "cells must cover every atom");
    p.partition = std::move(out);
  }
  if (doc.contains("grid")) p.grid = grid_from(doc.at("grid"), "/grid");
  if (doc.contains("value_dim")) {
    p.value_dim = static_cast<int>(count(doc.at("value_dim"), "/value_dim"));
    require(*p.value_dim > 0, "/value_dim", "must be positive");
  }
  const bool is_pref = p.kind == "maximal";
  if (doc.contains("psi")) {
    require(!is_pref, "/psi", "kind maximal takes its correspondence under pref");
    p.psi = records_from(doc.at("psi"), "/psi");
  }
  if (doc.contains("pref")) {
    require(is_pref, "/pref", "only kind maximal takes pref");
    p.psi = records_from(doc.at("pref"), "/pref");
  }
  for (const auto& r : p.psi)
    require(labels.count(r.atom) > 0, is_pref ? "/pref" : "/psi", "unknown atom label " + r.atom);
  if (doc.contains("witness")) p.witness = witness_from(doc.at("witness"), "/witness");
  if (doc.contains("players")) {
    const auto& pls = array(doc.at("players"), "/players");
    for (std::size_t k = 0; k < pls.size(); ++k) {
      const std::string pp = "/players/" + std::to_string(k);
      allow_keys(pls[k], pp, {"name", "grid", "concave"});
      PlayerSpec pl;
      pl.name = text(need(pls[k], "name", pp), pp + "/name");
      pl.grid = grid_from(need(pls[k], "grid", pp), pp + "/grid");
      if (pls[k].contains("concave")) pl.concave = boolean(pls[k].at("concave"), pp + "/concave");
      p.players.push_back(std::move(pl));
    }
  }
  if (doc.contains("payoff")) p.payoff = payoff_from(doc.at("payoff"), "/payoff");
  if (doc.contains("priors")) {
    const auto& pr = array(doc.at("priors"), "/priors");
    for (std::size_t k = 0; k < pr.size(); ++k) {
      p.priors.push_back(numbers(pr[k], "/priors/" + std::to_string(k)));
      require(p.priors.back().size() == p.atom_labels.size(), "/priors/" + std::to_string(k), "one density value per atom expected");
    }
  }
  if (doc.contains("options")) p.options = options_from(doc.at("options"), "/options");

  const bool game = p.kind == "nash" || p.kind == "bayes";
  if (game) {
    require(!p.players.empty(), "/players", "required for kind " + p.kind);
    require(p.payoff.has_value(), "/payoff", "required for kind " + p.kind);
    require(p.options.eps_eq.has_value(), "/options/eps_eq", "required for kind " + p.kind);
    require(!p.grid && p.psi.empty() && !p.witness, "/", "grid, psi and witness are not used by kind " + p.kind);
    if (p.kind == "bayes") {
      require(p.partition.has_value(), "/partition", "required for kind bayes");
      require(p.priors.empty() || p.priors.size() == p.players.size(), "/priors", "one prior per player expected");
    } else {
      require(p.priors.empty(), "/priors", "only kind bayes takes priors");
    }
  } else {
    require(p.grid.has_value(), "/grid", "required for kind " + p.kind);
    require(p.players.empty() && !p.payoff && p.priors.empty(), "/", "players, payoff and priors are only for nash/bayes");
    if (p.kind == "cip-check" || p.kind == "select") require(p.value_dim.has_value(), "/value_dim", "required for kind " + p.kind);
  }
  return p;
}

json problem_to_json(const ProblemSpec& p) {
  json j;
  j["kind"] = p.kind;
  json atoms = json::array();
  for (std::size_t k = 0; k < p.atom_labels.size(); ++k)
    atoms.push_back({{"label", p.atom_labels[k]}, {"weight", p.atom_weights[k]}});
  j["atoms"] = atoms;
  if (p.partition) j["partition"] = *p.partition;
  if (p.grid) j["grid"] = grid_json(*p.grid);
  if (p.value_dim) j["value_dim"] = *p.value_dim;
  if (p.kind == "maximal")
    j["pref"] = records_json(p.psi);
  else if (!p.psi.empty() || p.grid)
    j["psi"] = records_json(p.psi);
  if (p.witness) j["witness"] = witness_json(*p.witness);
  if (!p.players.empty()) {
    json a = json::array();
    for (const auto& pl : p.players) a.push_back({{"name", pl.name}, {"grid", grid_json(pl.grid)}, {"concave", pl.concave}});
    j["players"] = a;
  }
  if (p.payoff) j["payoff"] = payoff_json(*p.payoff);
  if (!p.priors.empty()) j["priors"] = p.priors;
  j["options"] = options_json(p.options);
  return j;
}

ProblemSpec parse_problem(const std::string& text) { return problem_from_json(parse_json(text)); }

std::string canonical_dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string serialize_problem(const ProblemSpec& p) { return canonical_dump(problem_to_json(p)); }

void apply_override(ProblemSpec& p, const std::string& key, const std::string& value) {
  auto as_double = [&]() {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != value.size() || !std::isfinite(v) || !(v > 0))
      throw ParseError("override " + key + ": expected a positive number, got '" + value + "'");
    return v;
  };
  auto as_count = [&]() {
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("override " + key + ": expected a nonnegative integer, got '" + value + "'");
    return static_cast<std::uint64_t>(std::stoull(value));
  };
  auto as_bool = [&]() {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParseError("override " + key + ": expected true or false, got '" + value + "'");
  };
  std::string k = key;
  std::replace(k.begin(), k.end(), '-', '_');
  if (k == "tol") {
    p.options.tol = as_double();
  } else if (k == "eps") {
    p.options.eps = as_double();
  } else if (k == "eps_eq") {
    p.options.eps_eq = as_double();
  } else if (k == "seed") {
    p.options.seed = as_count();
  } else if (k == "k_max") {
    p.options.k_max = as_count();
    if (*p.options.k_max == 0) throw ParseError("override k_max: must be positive");
  } else if (k == "restarts") {
    p.options.restarts = as_count();
  } else if (k == "closed_valued") {
    p.options.closed_valued = as_bool();
  } else if (k == "strict_cip") {
    p.options.strict_cip = as_bool();
  } else if (k == "alpha") {
    const double a = as_double();
    if (a > 1) throw ParseError("override alpha: must lie in (0, 1]");
    p.options.alpha = a;
  } else if (k == "mode") {
    try {
      cip_mode_from_string(value);
    } catch (const Error&) {
      throw ParseError("override mode: expected atomic, shared, countable or indexed");
    }
    if (!p.witness) p.witness = WitnessSpec{};
    p.witness->mode = value;
  } else if (k == "mesh") {
    const double h = as_double();
    if (p.grid) p.grid->mesh = h;
    for (auto& pl : p.players) pl.grid.mesh = h;
  } else {
    throw ParseError("unknown override key '" + key + "'");
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::string out;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", digest[k]);
    out += buf;
  }
  return out;
}

json run_problem(const ProblemSpec& p) {
  const Context c = build_context(p);
  json cert;
  cert["kind"] = p.kind;
  cert["warnings"] = json::array();
  std::vector<Check> checks;
  json outputs = json::object();
  try {
    if (p.kind == "cip-check" || p.kind == "select" || p.kind == "fixpoint" || p.kind == "maximal") {
      auto grid = build_grid(*p.grid);
      const int dim = p.value_dim.value_or(grid->dim());
      auto psi = build_corr(p.psi, c, grid, dim, p.kind == "maximal" ? "pref" : "psi");
      const CipWitness w = build_witness(p, c, psi);
      if (p.kind == "cip-check") {
        const bool strict = p.options.strict_cip.value_or(false);
        const double eps = p.options.eps.value_or(witness_lsc_eps(*psi, w, strict));
        const auto r = cip_verify(*psi, w, eps, strict);
        double empty_locals = 0;
        for (const auto& f : r.failures) empty_locals += f.condition == "empty-local" ? 1 : 0;
        checks.push_back(make_check("cip nonempty locals", empty_locals, 0.0, "(t,z) ∈ U_Ψ with F_z(t,z) = ∅"));
        checks.push_back(make_check("cip inclusion", r.max_inclusion_residual, kMembershipTol, "F_z(t,x) ⊆ con Ψ(t,x) on the ball"));
        checks.push_back(make_strict_check("cip lsc", r.max_lsc_excess, eps,
                                           strict ? "con F_z(t,·) l.s.c. on the whole grid" : "con F_z(t,·) l.s.c. on the ball"));
        if (w.mode != CipMode::atomic) {
          const auto s = scip_verify(*psi, w, *c.part, eps, strict);
          for (const auto& ch : s.checks)
            if (ch.name != "cip") checks.push_back(ch);
        }
        json fails = json::array();
        for (std::size_t k = 0; k < std::min<std::size_t>(r.failures.size(), 50); ++k) {
          const auto& f = r.failures[k];
          fails.push_back({{"condition", f.condition},
                           {"atom", c.space->labels()[f.t]},
                           {"z", f.z},
                           {"x", f.x},
                           {"x_prime", f.x_prime},
                           {"residual", number_or_string(f.residual)}});
        }
        outputs = {{"eps", eps}, {"mode", to_string(w.mode)}, {"failures", fails}, {"failure_count", r.failures.size()}};
      } else if (p.kind == "select") {
        const auto r = caratheodory_select(*psi, w, *c.part, select_options(p.options, false));
        checks = r.selection.checks;
        outputs = {{"eps", r.eps}, {"modulus", r.selection.modulus}, {"psi", selection_json(r.selection)}};
      } else if (p.kind == "fixpoint") {
        FixedPointOptions fo;
        fo.select = select_options(p.options, false);
        fo.select.tol = 1e-7;
        if (p.options.tol) fo.tol = *p.options.tol;
        if (p.options.alpha) fo.alpha = *p.options.alpha;
        const auto r = random_fixed_point(*psi, w, *c.part, fo);
        checks = r.checks;
        json vals = json::array();
        for (std::size_t t = 0; t < c.space->size(); ++t)
          vals.push_back({{"atom", c.space->labels()[t]},
                          {"value", vec_json(r.values[t])},
                          {"residual", r.residuals[t]},
                          {"method", r.method[t]}});
        outputs = {{"values", vals}, {"modulus", r.selection.modulus}};
      } else {
        EquilibriumOptions eo;
        eo.select = select_options(p.options, true);
        eo.seed = p.options.seed.value_or(0);
        const auto r = maximal_element(*psi, w, *c.part, p.options.eps_eq.value_or(0.0), eo);
        checks = r.checks;
        json prof = json::array();
        for (std::size_t t = 0; t < c.space->size(); ++t)
          prof.push_back({{"atom", c.space->labels()[t]}, {"node", r.nodes[t]}, {"value", vec_json(r.values[t])}});
        outputs = {{"profile", prof}};
      }
    } else {
      const GameSpec g = build_game(p, c);
      EquilibriumOptions eo;
      eo.select = select_options(p.options, true);
      eo.seed = p.options.seed.value_or(0);
      EquilibriumCertificate r;
      if (p.kind == "nash") {
        r = random_nash(g, *c.part, *p.options.eps_eq, eo);
      } else {
        BayesSpec b{g, c.part, {}};
        for (std::size_t i = 0; i < p.players.size(); ++i)
          b.priors.push_back(p.priors.empty() ? Prior::uniform(c.space) : Prior(c.space, p.priors[i]));
        r = bayes_equilibrium(b, *p.options.eps_eq, eo);
      }
      checks = r.checks;
      outputs = profile_json(r, *c.space, *c.part);
      for (const auto& w : r.warnings) cert["warnings"].push_back(w);
    }
  } catch (const NoCertificateError& e) {
    cert["status"] = "no-certificate";
    cert["checks"] = json::array();
    cert["outputs"] = {{"best_residual", number_or_string(e.best_residual())}};
    cert["error"] = e.what();
    return cert;
  } catch (const ConstructionError& e) {
    cert["status"] = "failed";
    cert["checks"] = checks_json({make_check("construction", std::numeric_limits<double>::infinity(), 0.0, e.what())});
    cert["outputs"] = json::object();
    cert["error"] = e.what();
    return cert;
  } catch (const InconsistencyError& e) {
    cert["status"] = "failed";
    cert["checks"] = checks_json({make_check("consistency", std::numeric_limits<double>::infinity(), 0.0, e.what())});
    cert["outputs"] = json::object();
    cert["error"] = e.what();
    return cert;
  }
  cert["status"] = all_pass(checks) ? "ok" : "failed";
  cert["checks"] = checks_json(checks);
  cert["outputs"] = outputs;
  return cert;
}

json certify(const ProblemSpec& p, const std::string& timestamp) {
  json cert = run_problem(p);
  cert["provenance"] = {{"input_hash", sha256_hex(serialize_problem(p))},
                        {"tool_version", kToolVersion},
                        {"seed", p.options.seed.value_or(0)},
                        {"timestamp", timestamp}};
  return cert;
}

std::string report(const json& certificate) {
  if (!certificate.is_object() || !certificate.contains("status") || !certificate.contains("checks") ||
      !certificate.at("checks").is_array())
    throw ParseError("not a certificate: status and checks are required");
  std::ostringstream out;
  const std::string status = certificate.at("status").get<std::string>();
  out << "kind: " << certificate.value("kind", std::string("?")) << "\n";
  out << "status: " << status << "\n";
  if (certificate.contains("error")) out << "error: " << certificate.at("error").get<std::string>() << "\n";

  auto residual_text = [](const json& r) { return r.is_number() ? format_number(r.get<double>()) : r.get<std::string>(); };
  std::vector<const json*> rows;
  for (const auto& c : certificate.at("checks"))
    if (!c.at("pass").get<bool>()) rows.push_back(&c);
  for (const auto& c : certificate.at("checks"))
    if (c.at("pass").get<bool>()) rows.push_back(&c);
  std::size_t w = 5;
  for (const auto* c : rows) w = std::max(w, c->at("name").get<std::string>().size());
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-22s  %-22s  %s\n", static_cast<int>(w), "check", "residual", "tolerance", "result");
  out << line;
  for (const auto* c : rows) {
    const auto& tol = c->at("tolerance");
    std::snprintf(line, sizeof line, "%-*s  %-22s  %-22s  %s\n", static_cast<int>(w),
                  c->at("name").get<std::string>().c_str(), residual_text(c->at("residual")).c_str(),
                  tol.is_null() ? "finite" : format_number(tol.get<double>()).c_str(),
                  c->at("pass").get<bool>() ? "pass" : "FAIL");
    out << line;
  }
  if (certificate.contains("outputs") && certificate.at("outputs").is_object()) {
    out << "outputs:";
    for (const auto& [k, v] : certificate.at("outputs").items()) {
      if (v.is_array())
        out << " " << k << "[" << v.size() << "]";
      else
        out << " " << k;
    }
    out << "\n";
  }
  if (certificate.contains("warnings"))
    for (const auto& wv : certificate.at("warnings")) out << "warning: " << wv.get<std::string>() << "\n";
  if (status == "ok") out << "ALL CHECKS PASSED\n";
  return out.str();
}

}  // namespace carasel::io
