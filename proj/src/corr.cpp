#include "carasel/corr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "carasel/errors.hpp"

namespace carasel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAdjSlack = 1e-9;

}  // namespace

GridSpace::GridSpace(std::vector<Vec> points, std::optional<double> mesh, std::optional<double> adjacency_radius)
    : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("GridSpace: no nodes");
  dim_ = static_cast<int>(points_[0].size());
  const std::size_t n = points_.size();
  for (const auto& p : points_) {
    if (static_cast<int>(p.size()) != dim_) throw DomainError("GridSpace: nodes differ in dimension");
    if (!p.allFinite()) throw DomainError("GridSpace: non-finite coordinate");
  }
  std::vector<double> nearest_nb(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(i, j);
      if (d <= kPointTol) throw DomainError("GridSpace: duplicate node " + std::to_string(j));
      diameter_ = std::max(diameter_, d);
      nearest_nb[i] = std::min(nearest_nb[i], d);
      nearest_nb[j] = std::min(nearest_nb[j], d);
    }
  }
  if (mesh) {
    mesh_ = *mesh;
  } else if (n == 1) {
    mesh_ = 1.0;
  } else {
    for (double nn : nearest_nb) mesh_ = std::max(mesh_, nn);
  }
  if (!(mesh_ > 0)) throw DomainError("GridSpace: mesh must be positive");
  adjacency_ = adjacency_radius.value_or(2.0 * mesh_);
  if (!(adjacency_ > 0)) throw DomainError("GridSpace: adjacency radius must be positive");
  neighbors_.resize(n);
  const double cut = adjacency_ * (1.0 - kAdjSlack);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && distance(i, j) < cut) neighbors_[i].push_back(j);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : neighbors_[i])
      if (i < j) edges_.emplace_back(i, j);
}

GridSpace GridSpace::uniform(double lo, double hi, std::size_t n, std::optional<double> adjacency_radius) {
  return box(make_vec({lo}), make_vec({hi}), {n}, adjacency_radius);
}

GridSpace GridSpace::box(const Vec& lo, const Vec& hi, std::vector<std::size_t> counts,
                         std::optional<double> adjacency_radius) {
  const auto d = static_cast<std::size_t>(lo.size());
  if (static_cast<std::size_t>(hi.size()) != d || counts.size() != d || d == 0)
    throw DomainError("GridSpace::box: lo, hi and counts must share a positive length");
  std::size_t total = 1;
  double mesh = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    if (counts[k] == 0) throw DomainError("GridSpace::box: zero count");
    if (counts[k] > 1 && !(hi[kk] > lo[kk])) throw DomainError("GridSpace::box: hi must exceed lo");
    if (counts[k] > 1) mesh = std::max(mesh, (hi[kk] - lo[kk]) / static_cast<double>(counts[k] - 1));
    total *= counts[k];
  }
  if (mesh == 0.0) mesh = 1.0;
  std::vector<Vec> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = d; k-- > 0;) {
      idx[k] = rem % counts[k];
      rem /= counts[k];
    }
    Vec p(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      p[kk] = counts[k] == 1 ? lo[kk]
                             : lo[kk] + (hi[kk] - lo[kk]) * static_cast<double>(idx[k]) /
                                            static_cast<double>(counts[k] - 1);
    }
    pts.push_back(std::move(p));
  }
  GridSpace g(std::move(pts), mesh, adjacency_radius);
  g.box_ = Box{lo, hi, std::move(counts)};
  return g;
}

bool GridSpace::adjacent(std::size_t i, std::size_t j) const {
  const auto& nb = neighbors_.at(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::size_t GridSpace::nearest(const Vec& x) const {
  std::size_t best = 0;
  double bd = kInf;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = (points_[i] - x).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

Corr::Corr(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid, int value_dim)
    : space_(std::move(space)), grid_(std::move(grid)), value_dim_(value_dim) {
  if (!space_ || !grid_) throw DomainError("Corr: missing atom space or grid");
  if (value_dim_ <= 0) throw DomainError("Corr: value dimension must be positive");
  values_.assign(space_->size() * grid_->size(), PointSet(value_dim_));
}

Corr::Corr(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid, int value_dim,
           std::vector<PointSet> values)
    : Corr(std::move(space), std::move(grid), value_dim) {
  if (values.size() != values_.size()) throw DomainError("Corr: value table has the wrong size");
  for (const auto& v : values)
    if (v.dim() != value_dim_) throw DomainError("Corr: value of the wrong dimension");
  values_ = std::move(values);
}

Corr Corr::from_function(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid,
                         int value_dim, const std::function<PointSet(std::size_t, std::size_t)>& f) {
  std::vector<PointSet> values;
  values.reserve(space->size() * grid->size());
  for (std::size_t t = 0; t < space->size(); ++t)
    for (std::size_t z = 0; z < grid->size(); ++z) values.push_back(f(t, z));
  return Corr(std::move(space), std::move(grid), value_dim, std::move(values));
}

bool Corr::same_shape(const Corr& other) const {
  return atoms() == other.atoms() && nodes() == other.nodes() && value_dim() == other.value_dim();
}

std::vector<Node> domain(const Corr& psi) {
  std::vector<Node> out;
  for (std::size_t t = 0; t < psi.atoms(); ++t)
    for (std::size_t z = 0; z < psi.nodes(); ++z)
      if (psi.nonempty(t, z)) out.push_back({t, z});
  return out;
}

SemicontinuityReport lsc_check(const Corr& psi, std::size_t t, double eps, bool hull) {
  SemicontinuityReport rep;
  const auto& grid = psi.grid();
  for (std::size_t z = 0; z < psi.nodes(); ++z) {
    const auto& a = psi.at(t, z);
    if (a.empty()) continue;
    for (std::size_t zp : grid.neighbors(z)) {
      const auto& b = psi.at(t, zp);
      if (b.empty()) continue;
      double worst = -1.0;
      std::size_t worst_k = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = hull ? dist_to_hull(a[k], b.points()) : point_dist(a[k], b);
        if (d > worst) {
          worst = d;
          worst_k = k;
        }
      }
      rep.max_excess = std::max(rep.max_excess, worst);
      if (!(worst < eps)) {
        rep.ok = false;
        rep.violations.push_back({z, zp, a[worst_k], worst});
      }
    }
  }
  return rep;
}

SemicontinuityReport usc_check(const Corr& psi, std::size_t t, double eps) {
  SemicontinuityReport rep;
  const auto& grid = psi.grid();
  for (std::size_t zp = 0; zp < psi.nodes(); ++zp) {
    const auto& b = psi.at(t, zp);
    if (b.empty()) continue;
    // Points of Ψ(t,z') that some neighbouring value also comes close to.
    std::vector<std::size_t> persistent;
    for (std::size_t k = 0; k < b.size(); ++k) {
      for (std::size_t zz : grid.neighbors(zp)) {
        const auto& c = psi.at(t, zz);
        if (!c.empty() && point_dist(b[k], c) < eps) {
          persistent.push_back(k);
          break;
        }
      }
    }
    for (std::size_t z : grid.neighbors(zp)) {
      const auto& a = psi.at(t, z);
      if (a.empty()) continue;
      double worst = -1.0;
      std::size_t worst_k = 0;
      for (std::size_t k : persistent) {
        const double d = point_dist(b[k], a);
        if (d > worst) {
          worst = d;
          worst_k = k;
        }
      }
      if (worst < 0) continue;
      rep.max_excess = std::max(rep.max_excess, worst);
      if (!(worst < eps)) {
        rep.ok = false;
        rep.violations.push_back({z, zp, b[worst_k], worst});
      }
    }
  }
  return rep;
}

bool lower_measurable_check(const Corr& psi, const InfoPartition& part, std::size_t z) {
  if (part.space().size() != psi.atoms()) throw DomainError("lower_measurable_check: partition on a different atom space");
  for (const auto& cell : part.cells()) {
    const auto& ref = psi.at(cell.front(), z);
    for (std::size_t t : cell)
      if (!same_points(ref, psi.at(t, z), 1e-9)) return false;
  }
  return true;
}

std::string to_string(CipMode mode) {
  switch (mode) {
    case CipMode::atomic:
      return "atomic";
    case CipMode::shared:
      return "shared";
    case CipMode::countable:
      return "countable";
    case CipMode::indexed:
      return "indexed";
  }
  return "atomic";
}

CipMode cip_mode_from_string(const std::string& s) {
  if (s == "atomic") return CipMode::atomic;
  if (s == "shared") return CipMode::shared;
  if (s == "countable") return CipMode::countable;
  if (s == "indexed") return CipMode::indexed;
  throw DomainError("unknown witness mode '" + s + "'");
}

CipWitness canonical_witness(std::shared_ptr<const Corr> psi, CipMode mode) {
  CipWitness w;
  w.mode = mode;
  const std::size_t n = psi->nodes();
  const auto& grid = psi->grid();
  const double beyond = 2.0 * grid.diameter() + 1.0;
  w.radii.assign(psi->atoms() * n, std::nullopt);
  for (std::size_t t = 0; t < psi->atoms(); ++t) {
    for (std::size_t z = 0; z < n; ++z) {
      if (!psi->nonempty(t, z)) continue;
      double r = beyond;
      for (std::size_t x = 0; x < n; ++x)
        if (!psi->nonempty(t, x)) r = std::min(r, grid.distance(z, x));
      w.radii[t * n + z] = r;
    }
  }
  w.locals.assign(n, psi);
  return w;
}

CipWitness shared_witness(const Corr& psi, std::shared_ptr<const Corr> f, double radius) {
  if (!(radius > 0)) throw DomainError("shared_witness: radius must be positive");
  CipWitness w;
  w.mode = CipMode::shared;
  const std::size_t n = psi.nodes();
  w.radii.assign(psi.atoms() * n, std::nullopt);
  for (const auto& nd : domain(psi)) w.radii[nd.t * n + nd.z] = radius;
  w.locals.assign(n, std::move(f));
  return w;
}

std::vector<std::size_t> index_set(const Corr& psi, const CipWitness& w, std::size_t t, std::size_t x) {
  std::vector<std::size_t> out;
  const std::size_t n = psi.nodes();
  for (std::size_t z = 0; z < n; ++z) {
    const auto r = w.radius(t, z, n);
    if (r && psi.grid().distance(x, z) < *r) out.push_back(z);
  }
  return out;
}

void validate_witness(const Corr& psi, const CipWitness& w) {
  const std::size_t n = psi.nodes();
  if (w.locals.size() != n) throw DomainError("witness: expected one local correspondence per grid node");
  for (const auto& f : w.locals) {
    if (!f) throw DomainError("witness: missing local correspondence");
    if (!f->same_shape(psi)) throw DomainError("witness: local correspondence does not match Ψ's atoms, grid or value dimension");
  }
  if (w.radii.size() != psi.atoms() * n) throw DomainError("witness: radius table has the wrong size");
  for (std::size_t t = 0; t < psi.atoms(); ++t) {
    for (std::size_t z = 0; z < n; ++z) {
      const auto& r = w.radii[t * n + z];
      if (psi.nonempty(t, z) != r.has_value())
        throw DomainError("witness: radii must be defined exactly on U_Ψ (atom " + std::to_string(t) + ", node " +
                          std::to_string(z) + ")");
      if (r && !(*r > 0)) throw DomainError("witness: radii must be positive");
    }
  }
}

namespace {

// Per-local tables shared by every z that uses the same local correspondence.
struct LocalTables {
  // Inclusion residual of F(t,x) in con Ψ(t,x); NaN = not yet computed, +inf = F empty or Ψ empty.
  std::vector<double> inclusion;
  // Hull Hausdorff distance per (t, edge); -1 when either endpoint value is empty.
  std::vector<double> edge_excess;
};

class WitnessCache {
 public:
  WitnessCache(const Corr& psi, const CipWitness& w) : psi_(psi), w_(w) {}

  double inclusion(std::size_t z, std::size_t t, std::size_t x) {
    auto& tab = tables(z);
    double& v = tab.inclusion[t * psi_.nodes() + x];
    if (std::isnan(v)) {
      const auto& f = w_.local(z).at(t, x);
      const auto& p = psi_.at(t, x);
      if (f.empty() || p.empty()) {
        v = kInf;
      } else {
        v = 0.0;
        for (const auto& q : f.points()) v = std::max(v, dist_to_hull(q, p.points()));
      }
    }
    return v;
  }

  // Pointer to the |edges| excess values of (local of z, t).
  const double* edges(std::size_t z, std::size_t t) {
    auto& tab = tables(z);
    const auto& edges = psi_.grid().edges();
    const std::size_t e = edges.size();
    if (tab.edge_excess.empty()) tab.edge_excess.assign(psi_.atoms() * e, std::numeric_limits<double>::quiet_NaN());
    if (e > 0 && std::isnan(tab.edge_excess[t * e])) {
      const auto& f = w_.local(z);
      for (std::size_t k = 0; k < e; ++k) {
        const auto& a = f.at(t, edges[k].first);
        const auto& b = f.at(t, edges[k].second);
        tab.edge_excess[t * e + k] = (a.empty() || b.empty()) ? -1.0 : hausdorff_hull_dist(a, b);
      }
    }
    return e == 0 ? nullptr : tab.edge_excess.data() + t * e;
  }

 private:
  LocalTables& tables(std::size_t z) {
    const Corr* key = w_.locals[z].get();
    auto it = tables_.find(key);
    if (it == tables_.end()) {
      LocalTables tab;
      tab.inclusion.assign(psi_.atoms() * psi_.nodes(), std::numeric_limits<double>::quiet_NaN());
      it = tables_.emplace(key, std::move(tab)).first;
    }
    return it->second;
  }

  const Corr& psi_;
  const CipWitness& w_;
  std::map<const Corr*, LocalTables> tables_;
};

double scale_floor(const PointSet& p) {
  double s = 1.0;
  for (const auto& q : p.points()) s = std::max(s, q.cwiseAbs().maxCoeff());
  return 16 * std::numeric_limits<double>::epsilon() * s;
}

bool in_ball(const GridSpace& g, std::size_t z, double r, std::size_t x) { return g.distance(x, z) < r; }

// Walks condition (ii) and calls on_edge(t, z, edge index, excess) for every tested edge.
template <class F>
void for_each_lsc_edge(const Corr& psi, const CipWitness& w, WitnessCache& cache, bool strict, F&& on_edge) {
  const auto& grid = psi.grid();
  const auto& edges = grid.edges();
  const std::size_t n = psi.nodes();
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t t = 0; t < psi.atoms(); ++t) {
      const auto r = w.radius(t, z, n);
      const bool whole = strict || !r;
      const double* ex = cache.edges(z, t);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        if (ex[k] < 0) continue;
        if (!whole && !(in_ball(grid, z, *r, edges[k].first) && in_ball(grid, z, *r, edges[k].second))) continue;
        on_edge(t, z, k, ex[k]);
      }
    }
  }
}

}  // namespace

CipReport cip_verify(const Corr& psi, const CipWitness& w, double eps, bool strict, double tol) {
  if (!(eps > 0)) throw DomainError("cip_verify: eps must be positive");
  validate_witness(psi, w);
  CipReport rep;
  WitnessCache cache(psi, w);
  const auto& grid = psi.grid();
  const std::size_t n = psi.nodes();
  for (std::size_t t = 0; t < psi.atoms(); ++t) {
    for (std::size_t z = 0; z < n; ++z) {
      const auto r = w.radius(t, z, n);
      if (!r) continue;
      for (std::size_t x = 0; x < n; ++x) {
        if (!in_ball(grid, z, *r, x)) continue;
        const double res = cache.inclusion(z, t, x);
        if (w.local(z).at(t, x).empty()) {
          rep.ok = false;
          rep.max_inclusion_residual = kInf;
          rep.failures.push_back({"empty-local", t, z, x, x, kInf});
          continue;
        }
        rep.max_inclusion_residual = std::max(rep.max_inclusion_residual, res);
        if (res > tol + scale_floor(psi.at(t, x))) {
          rep.ok = false;
          rep.failures.push_back({"inclusion", t, z, x, x, res});
        }
      }
    }
  }
  const auto& edges = grid.edges();
  for_each_lsc_edge(psi, w, cache, strict, [&](std::size_t t, std::size_t z, std::size_t k, double ex) {
    rep.max_lsc_excess = std::max(rep.max_lsc_excess, ex);
    if (!(ex < eps)) {
      rep.ok = false;
      rep.failures.push_back({"lsc", t, z, edges[k].first, edges[k].second, ex});
    }
  });
  return rep;
}

double witness_lsc_eps(const Corr& psi, const CipWitness& w, bool strict) {
  validate_witness(psi, w);
  WitnessCache cache(psi, w);
  double worst = 0.0;
  for_each_lsc_edge(psi, w, cache, strict,
                    [&](std::size_t, std::size_t, std::size_t, double ex) { worst = std::max(worst, ex); });
  return worst * (1.0 + 1e-9) + 1e-12;
}

ScipReport scip_verify(const Corr& psi, const CipWitness& w, const InfoPartition& part, double eps, bool strict) {
  if (w.mode == CipMode::atomic) throw DomainError("scip_verify: an atomic witness carries no strong structure");
  if (part.space().size() != psi.atoms()) throw DomainError("scip_verify: partition on a different atom space");
  ScipReport rep;
  rep.cip = cip_verify(psi, w, eps, strict);
  rep.checks.push_back(make_check("cip", static_cast<double>(rep.cip.failures.size()), 0.0,
                                  "conditions (i)-(ii) on the grid"));
  const std::size_t n = psi.nodes();

  // Joint lower measurability of con F_z, via cell-wise constancy of each hull.
  {
    double worst = 0.0;
    std::map<const Corr*, bool> done;
    for (std::size_t z = 0; z < n; ++z) {
      const Corr* f = w.locals[z].get();
      if (done[f]) continue;
      done[f] = true;
      for (std::size_t x = 0; x < n; ++x) {
        for (const auto& cell : part.cells()) {
          const auto& ref = f->at(cell.front(), x);
          for (std::size_t t : cell) {
            const auto& v = f->at(t, x);
            if (ref.empty() != v.empty()) {
              worst = kInf;
            } else if (!ref.empty()) {
              worst = std::max(worst, hausdorff_hull_dist(ref, v));
            }
          }
        }
      }
    }
    rep.checks.push_back(make_check("joint-lower-measurability", worst, 1e-9, kLowerMeasurableLabel));
  }

  switch (w.mode) {
    case CipMode::shared: {
      double differing = 0;
      for (std::size_t z = 1; z < n; ++z) {
        if (w.locals[z] == w.locals[0]) continue;
        bool same = true;
        for (std::size_t k = 0; k < psi.atoms() * n && same; ++k)
          same = same_points(w.locals[z]->values()[k], w.locals[0]->values()[k], 1e-12);
        if (!same) differing += 1;
      }
      rep.checks.push_back(make_check("shared-witness", differing, 0.0, "number of locals differing from F_0"));
      break;
    }
    case CipMode::countable: {
      double bad = 0;
      for (std::size_t z = 0; z < n; ++z) {
        for (std::size_t x = 0; x < n; ++x) {
          for (const auto& cell : part.cells()) {
            auto member = [&](std::size_t t) {
              const auto r = w.radius(t, z, n);
              return r && psi.grid().distance(x, z) < *r;
            };
            const bool ref = member(cell.front());
            for (std::size_t t : cell)
              if (member(t) != ref) {
                bad += 1;
                break;
              }
          }
        }
      }
      rep.checks.push_back(make_check("ball-measurability", bad, 0.0, "(z, x, cell) triples where x ∈ O_z^t varies within the cell"));
      break;
    }
    case CipMode::indexed: {
      double dom_bad = 0, idx_bad = 0;
      for (std::size_t x = 0; x < n; ++x) {
        for (const auto& cell : part.cells()) {
          const bool ref = psi.nonempty(cell.front(), x);
          const auto ref_idx = index_set(psi, w, cell.front(), x);
          for (std::size_t t : cell) {
            if (psi.nonempty(t, x) != ref) dom_bad += 1;
            if (index_set(psi, w, t, x) != ref_idx) idx_bad += 1;
          }
        }
      }
      rep.checks.push_back(make_check("domain-measurability", dom_bad, 0.0));
      rep.checks.push_back(make_check("index-set-measurability", idx_bad, 0.0));

      double worst = 0.0, modulus = 0.0;
      const auto& grid = psi.grid();
      for (std::size_t t = 0; t < psi.atoms(); ++t) {
        for (std::size_t x = 0; x < n; ++x) {
          for (const auto& [z, zp] : grid.edges()) {
            if (!psi.nonempty(t, z) || !psi.nonempty(t, zp)) continue;
            const auto& a = w.local(z).at(t, x);
            const auto& b = w.local(zp).at(t, x);
            if (a.empty() || b.empty()) continue;
            const double h = hausdorff_hull_dist(a, b);
            worst = std::max(worst, h);
            modulus = std::max(modulus, h / grid.distance(z, zp));
          }
        }
      }
      rep.checks.push_back(make_strict_check("hausdorff-continuity", worst, eps,
                                             "discrete modulus " + format_number(modulus)));
      if (!w.bound) {
        rep.checks.push_back(make_check("bounding-box", kInf, 0.0, "no bounding box supplied"));
      } else {
        const auto& [lo, hi] = *w.bound;
        if (lo.size() != psi.value_dim() || hi.size() != psi.value_dim())
          throw DomainError("scip_verify: bounding box dimension differs from the value dimension");
        double out = 0.0;
        for (const auto& f : w.locals)
          for (const auto& v : f->values())
            for (const auto& p : v.points())
              out = std::max(out, std::max((lo - p).maxCoeff(), (p - hi).maxCoeff()));
        rep.checks.push_back(make_check("bounding-box", std::max(0.0, out), 0.0));
      }
      break;
    }
    case CipMode::atomic:
      break;
  }
  rep.ok = all_pass(rep.checks);
  return rep;
}

Corr k_operator(const Corr& psi, const CipWitness& w) {
  validate_witness(psi, w);
  const int d = psi.value_dim();
  std::map<std::tuple<const Corr*, std::size_t, std::size_t>, std::vector<Vec>> memo;
  return Corr::from_function(psi.space_ptr(), psi.grid_ptr(), d, [&](std::size_t t, std::size_t x) {
    std::vector<Vec> pts;
    for (std::size_t z : index_set(psi, w, t, x)) {
      const Corr* f = w.locals[z].get();
      auto key = std::make_tuple(f, t, x);
      auto it = memo.find(key);
      if (it == memo.end()) {
        std::vector<Vec> inner;
        const auto& v = f->at(t, x);
        if (!v.empty() && affine_rank(v.points()) == d) {
          const ConvexSet c(v);
          const auto h = halfspaces(c);
          for (const auto& p : v.points())
            if (halfspace_margin(p, h) > 0) inner.push_back(p);
          const Vec mid = c.centroid();
          if (halfspace_margin(mid, h) > 0) inner.push_back(mid);
        }
        it = memo.emplace(key, std::move(inner)).first;
      }
      pts.insert(pts.end(), it->second.begin(), it->second.end());
    }
    return PointSet(d, std::move(pts));
  });
}

PointSet n_operator(std::size_t t, std::size_t x, const std::vector<std::size_t>& c, const CipWitness& w) {
  if (w.mode != CipMode::indexed) throw DomainError("n_operator: needs an indexed-mode witness");
  int d = -1;
  std::vector<Vec> pts;
  for (std::size_t z : c) {
    const auto& v = w.local(z).at(t, x);
    d = v.dim();
    for (auto& p : extreme_points(v.points())) pts.push_back(std::move(p));
  }
  if (d < 0) d = w.locals.empty() ? 1 : w.locals.front()->value_dim();
  return PointSet(d, std::move(pts));
}

}  // namespace carasel
