#include "carasel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "carasel/errors.hpp"
#include "carasel/parallel.hpp"

namespace carasel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Projection onto one tabulated convex value, with cheap paths for points and intervals.
class NodeProjector {
 public:
  explicit NodeProjector(const PointSet& v) : verts_(v.points()) {
    if (verts_.size() > 1 && v.dim() == 1) {
      interval_ = true;
      lo_ = hi_ = verts_[0][0];
      for (const auto& p : verts_) {
        lo_ = std::min(lo_, p[0]);
        hi_ = std::max(hi_, p[0]);
      }
    }
  }

  Vec project(const Vec& x) const {
    if (verts_.size() == 1) return verts_[0];
    if (interval_) return make_vec({std::clamp(x[0], lo_, hi_)});
    return project_onto_hull(x, verts_).point;
  }

  Vec centroid() const {
    Vec c = Vec::Zero(verts_[0].size());
    for (const auto& v : verts_) c += v;
    return c / static_cast<double>(verts_.size());
  }

  const std::vector<Vec>& vertices() const { return verts_; }

 private:
  std::vector<Vec> verts_;
  bool interval_ = false;
  double lo_ = 0, hi_ = 0;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double selection_modulus(const GridSpace& grid, const std::vector<std::optional<Vec>>& v, std::size_t offset) {
  double l = 0.0;
  for (const auto& [a, b] : grid.edges()) {
    const auto& va = v[offset + a];
    const auto& vb = v[offset + b];
    if (va && vb) l = std::max(l, (*va - *vb).norm() / grid.distance(a, b));
  }
  return l;
}

// Cell-wise constancy of the inputs that feed Φ: Ψ, the radii and every local.
bool witness_cellwise(const Corr& psi, const CipWitness& w, const InfoPartition& part) {
  const std::size_t n = psi.nodes();
  for (std::size_t z = 0; z < n; ++z)
    if (!lower_measurable_check(psi, part, z)) return false;
  for (const auto& cell : part.cells()) {
    for (std::size_t z = 0; z < n; ++z) {
      const auto ref = w.radius(cell.front(), z, n);
      for (std::size_t t : cell)
        if (w.radius(t, z, n) != ref) return false;
    }
  }
  std::map<const Corr*, bool> done;
  for (const auto& f : w.locals) {
    if (done[f.get()]) continue;
    done[f.get()] = true;
    for (std::size_t z = 0; z < n; ++z)
      if (!lower_measurable_check(*f, part, z)) return false;
  }
  return true;
}

std::string node_name(const AtomSpace& space, std::size_t t, std::size_t z) {
  return "(atom " + space.labels()[t] + ", node " + std::to_string(z) + ")";
}

}  // namespace

std::vector<Node> Selection::domain() const {
  std::vector<Node> out;
  const std::size_t n = grid->size();
  for (std::size_t t = 0; t < space->size(); ++t)
    for (std::size_t z = 0; z < n; ++z)
      if (values[t * n + z]) out.push_back({t, z});
  return out;
}

PhiResult construct_phi(const Corr& psi, const CipWitness& w, const InfoPartition& part, double eps) {
  validate_witness(psi, w);
  if (part.space().size() != psi.atoms()) throw DomainError("construct_phi: partition on a different atom space");
  const std::size_t n = psi.nodes();
  const int d = psi.value_dim();
  if (w.mode == CipMode::shared) {
    for (const auto& f : w.locals) {
      if (f == w.locals.front()) continue;
      for (std::size_t k = 0; k < f->values().size(); ++k)
        if (!same_points(f->values()[k], w.locals.front()->values()[k], 1e-12))
          throw DomainError("construct_phi: shared-mode witness with differing locals");
    }
  }

  std::vector<PointSet> values;
  values.reserve(psi.atoms() * n);
  for (std::size_t t = 0; t < psi.atoms(); ++t) {
    for (std::size_t x = 0; x < n; ++x) {
      std::vector<Vec> pooled;
      std::vector<const Corr*> used;
      for (std::size_t z : index_set(psi, w, t, x)) {
        const Corr* f = w.locals[z].get();
        if (std::find(used.begin(), used.end(), f) != used.end()) continue;
        used.push_back(f);
        const auto& v = f->at(t, x);
        pooled.insert(pooled.end(), v.points().begin(), v.points().end());
      }
      values.emplace_back(d, extreme_points(pooled));
    }
  }
  PhiResult res{Corr(psi.space_ptr(), psi.grid_ptr(), d, std::move(values)), {}, true};
  const Corr& phi = res.phi;

  // (A) inclusion in con Ψ.
  double incl = 0.0;
  for (const auto& nd : domain(psi)) {
    for (const auto& v : phi.at(nd.t, nd.z).points())
      incl = std::max(incl, dist_to_hull(v, psi.at(nd.t, nd.z).points()));
  }
  res.certificate.push_back(make_check("phi.A inclusion", incl, 1e-9, "max distance of a vertex of Φ(t,x) to con Ψ(t,x)"));

  // (B) equal domains.
  double mismatch = 0;
  for (std::size_t t = 0; t < psi.atoms(); ++t)
    for (std::size_t x = 0; x < n; ++x)
      if (psi.nonempty(t, x) != phi.nonempty(t, x)) mismatch += 1;
  res.certificate.push_back(make_check("phi.B domain", mismatch, 0.0, "nodes where U_Φ and U_Ψ differ"));

  // (C) l.s.c. of each section at eps.
  double lsc = 0.0;
  for (std::size_t t = 0; t < psi.atoms(); ++t) lsc = std::max(lsc, lsc_check(phi, t, eps, true).max_excess);
  res.certificate.push_back(make_strict_check("phi.C lsc", lsc, eps, "largest hull excess over adjacent pairs"));

  // (D) measurability.
  if (part.is_finest()) {
    res.certificate.push_back(make_check("phi.D measurability", 0.0, 0.0, "trivially measurable (finest partition)"));
  } else if (witness_cellwise(psi, w, part)) {
    double worst = 0.0;
    for (const auto& cell : part.cells()) {
      for (std::size_t x = 0; x < n; ++x) {
        const auto& ref = phi.at(cell.front(), x);
        for (std::size_t t : cell) {
          const auto& v = phi.at(t, x);
          if (ref.empty() != v.empty())
            worst = kInf;
          else if (!ref.empty())
            worst = std::max(worst, hausdorff_hull_dist(ref, v));
        }
      }
    }
    res.certificate.push_back(make_check("phi.D measurability", worst, 1e-9, "cell-wise constancy of Φ"));
  } else {
    res.certificate.push_back(make_check("phi.D measurability", 0.0, 0.0,
                                         "witness varies within cells; atoms are measurable, so Φ is"));
  }

  // (E) interiority where 𝕂(Ψ) ≠ ∅.
  const Corr k = k_operator(psi, w);
  double missing = 0;
  for (std::size_t t = 0; t < psi.atoms(); ++t) {
    for (std::size_t x = 0; x < n; ++x) {
      if (!k.nonempty(t, x)) continue;
      res.kernel_empty = false;
      if (!phi.nonempty(t, x) || !(max_interior_margin(ConvexSet(phi.at(t, x))) > 0)) missing += 1;
    }
  }
  res.certificate.push_back(make_check("phi.E interiority", missing, 0.0,
                                       res.kernel_empty ? "K(Ψ) is empty" : "nodes with K(Ψ) ≠ ∅ but int Φ = ∅"));
  return res;
}

GridSelection grid_select(const Corr& phi, std::size_t t, double tol, const GridSelectOptions& opts) {
  if (t >= phi.atoms()) throw DomainError("grid_select: atom out of range");
  const std::size_t n = phi.nodes();
  const auto& grid = phi.grid();
  std::vector<std::optional<NodeProjector>> proj(n);
  for (std::size_t z = 0; z < n; ++z) {
    if (phi.nonempty(t, z)) {
      proj[z].emplace(phi.at(t, z));
    } else if (opts.claimed && (*opts.claimed)[z]) {
      throw InconsistencyError("grid_select: empty value at claimed domain node " + node_name(phi.space(), t, z));
    }
  }
  if (opts.anchors && opts.anchors->size() != n) throw DomainError("grid_select: one anchor per node expected");

  GridSelection out;
  out.values.assign(n, std::nullopt);
  double scale = 1.0;
  for (std::size_t z = 0; z < n; ++z) {
    if (!proj[z]) continue;
    out.values[z] = proj[z]->centroid();
    scale = std::max(scale, out.values[z]->cwiseAbs().maxCoeff());
  }
  const int d = phi.value_dim();
  for (out.sweeps = 0; out.sweeps < opts.max_sweeps; ++out.sweeps) {
    double change = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      if (!proj[z]) continue;
      Vec sum = Vec::Zero(d);
      double weight = 0.0;
      for (std::size_t nb : grid.neighbors(z)) {
        if (!out.values[nb]) continue;
        sum += *out.values[nb];
        weight += 1.0;
      }
      if (opts.anchors) {
        sum += opts.anchor_weight * (*opts.anchors)[z];
        weight += opts.anchor_weight;
      }
      if (weight == 0.0) continue;
      Vec next = proj[z]->project(sum / weight);
      change = std::max(change, (next - *out.values[z]).norm());
      out.values[z] = std::move(next);
    }
    if (change <= opts.stop_tol * scale) {
      ++out.sweeps;
      break;
    }
  }
  for (std::size_t z = 0; z < n; ++z) {
    if (!proj[z]) continue;
    const double r = dist_to_hull(*out.values[z], proj[z]->vertices());
    if (r > tol) {
      std::ostringstream msg;
      msg << "grid_select: value at " << node_name(phi.space(), t, z) << " misses Φ by " << r;
      throw ConstructionError(msg.str());
    }
  }
  out.modulus = selection_modulus(grid, out.values, 0);
  for (const auto& [a, b] : grid.edges())
    if (out.values[a] && out.values[b]) out.energy += (*out.values[a] - *out.values[b]).squaredNorm();
  return out;
}

Vec interior_series(const ConvexSet& b, const std::vector<Vec>& dense, std::size_t k_max) {
  if (dense.empty()) throw PreconditionError("interior_series: empty dense list");
  if (k_max == 0) throw PreconditionError("interior_series: k_max must be positive");
  if (affine_rank(b.vertices()) < b.dim()) throw PreconditionError("interior_series: b is not full-dimensional");
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i].size() != b.dim()) throw DomainError("interior_series: dimension mismatch");
    if (!convex_membership(dense[i], b, 1e-9))
      throw PreconditionError("interior_series: dense point " + std::to_string(i) + " lies outside b");
  }
  const Vec& y1 = dense.front();
  Vec sum = Vec::Zero(b.dim());
  for (std::size_t i = 1; i <= k_max; ++i) {
    const Vec& y = dense[(i - 1) % dense.size()];
    const Vec diff = y - y1;
    const Vec z = y + diff / std::max(1.0, diff.norm());
    sum += std::ldexp(1.0, -static_cast<int>(i)) * z;
  }
  sum += std::ldexp(1.0, -static_cast<int>(k_max)) * y1;
  return sum;
}

SelectResult caratheodory_select(const Corr& psi, const CipWitness& w, const InfoPartition& part,
                                 const SelectOptions& opts) {
  validate_witness(psi, w);
  if (part.space().size() != psi.atoms()) throw DomainError("caratheodory_select: partition on a different atom space");
  if (!(opts.tol > 0)) throw DomainError("caratheodory_select: tol must be positive");
  const double eps = opts.eps.value_or(witness_lsc_eps(psi, w, true));
  const auto cip = cip_verify(psi, w, eps, opts.strict_cip);
  if (!cip.ok) {
    const auto& f = cip.failures.front();
    std::ostringstream msg;
    msg << "caratheodory_select: CIP fails (" << f.condition << " at " << node_name(psi.space(), f.t, f.x)
        << ", witness node " << f.z << ", residual " << f.residual << ")";
    throw PreconditionError(msg.str());
  }

  SelectResult res{Selection{}, construct_phi(psi, w, part, eps), eps};
  Selection& sel = res.selection;
  sel.space = psi.space_ptr();
  sel.grid = psi.grid_ptr();
  sel.value_dim = psi.value_dim();
  const std::size_t n = psi.nodes();
  const std::size_t atoms = psi.atoms();
  sel.values.assign(atoms * n, std::nullopt);
  sel.atom_modulus.assign(atoms, 0.0);
  sel.checks.push_back(make_check("cip", 0.0, 0.0, "conditions (i)-(ii) at eps " + format_number(eps)));
  sel.checks.push_back(make_check("alternative", 0.0, 0.0,
                                  opts.closed_valued ? "finite-dimensional values; closed-valued branch"
                                                     : "finite-dimensional values; series branch"));
  const Corr& phi = res.phi.phi;

  parallel_for(atoms, [&](std::size_t t) {
    std::vector<bool> claimed(n);
    for (std::size_t z = 0; z < n; ++z) claimed[z] = psi.nonempty(t, z);
    GridSelectOptions base;
    base.claimed = &claimed;
    const auto phi1 = grid_select(phi, t, opts.tol, base);
    std::vector<std::optional<Vec>> psi_t = phi1.values;
    if (!opts.closed_valued) {
      // Perturbed energy-minimal selections stand in for the dense family {φ_k}.
      std::vector<std::vector<std::optional<Vec>>> family{phi1.values};
      for (std::size_t k = 1; k <= opts.restarts; ++k) {
        std::mt19937_64 rng(splitmix(opts.seed ^ splitmix((part.cell_of(t) << 20) + k)));
        std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);
        std::vector<Vec> anchors(n, Vec::Zero(psi.value_dim()));
        for (std::size_t z = 0; z < n; ++z) {
          if (!phi.nonempty(t, z)) continue;
          const auto& verts = phi.at(t, z).points();
          std::vector<double> wts(verts.size());
          double total = 0;
          for (auto& wt : wts) total += (wt = -std::log(unif(rng)));
          for (std::size_t i = 0; i < verts.size(); ++i) anchors[z] += (wts[i] / total) * verts[i];
        }
        GridSelectOptions o = base;
        o.anchors = &anchors;
        family.push_back(grid_select(phi, t, opts.tol, o).values);
      }
      const std::size_t m = family.size();
      for (std::size_t z = 0; z < n; ++z) {
        if (!phi1.values[z]) continue;
        const Vec& base_pt = *phi1.values[z];
        Vec sum = Vec::Zero(psi.value_dim());
        for (std::size_t k = 1; k <= opts.k_max; ++k) {
          const Vec diff = *family[(k - 1) % m][z] - base_pt;
          const Vec psi_k = base_pt + diff / std::max(1.0, diff.norm());
          sum += std::ldexp(1.0, -static_cast<int>(k)) * psi_k;
        }
        sum += std::ldexp(1.0, -static_cast<int>(opts.k_max)) * base_pt;
        psi_t[z] = sum;
      }
    }
    for (std::size_t z = 0; z < n; ++z) sel.values[t * n + z] = psi_t[z];
    sel.atom_modulus[t] = selection_modulus(psi.grid(), sel.values, t * n);
  });

  double worst = 0.0;
  for (const auto& nd : domain(psi)) {
    const double r = dist_to_hull(sel.at(nd.t, nd.z), psi.at(nd.t, nd.z).points());
    if (r > opts.tol) {
      std::ostringstream msg;
      msg << "caratheodory_select: ψ" << node_name(psi.space(), nd.t, nd.z) << " misses con Ψ by " << r;
      throw ConstructionError(msg.str());
    }
    worst = std::max(worst, r);
  }
  sel.checks.push_back(make_check("membership", worst, opts.tol, "max distance of ψ(t,x) to con Ψ(t,x)"));
  sel.modulus = 0.0;
  for (double l : sel.atom_modulus) sel.modulus = std::max(sel.modulus, l);
  sel.checks.push_back(make_check("modulus", sel.modulus, kInf, "max ‖ψ(t,z)−ψ(t,z')‖/d(z,z') over adjacent pairs"));

  if (part.is_finest()) {
    sel.checks.push_back(make_check("measurability", 0.0, 0.0, "trivially measurable (finest partition)"));
  } else if (witness_cellwise(psi, w, part)) {
    double diff = 0.0;
    for (const auto& cell : part.cells())
      for (std::size_t z = 0; z < n; ++z)
        for (std::size_t t : cell) {
          const auto& a = sel.values[cell.front() * n + z];
          const auto& b = sel.values[t * n + z];
          if (a.has_value() != b.has_value())
            diff = kInf;
          else if (a)
            diff = std::max(diff, (*a - *b).norm());
        }
    sel.checks.push_back(make_check("measurability", diff, 1e-12, "cell-wise constancy of ψ"));
  } else {
    sel.checks.push_back(make_check("measurability", 0.0, 0.0,
                                    "inputs vary within cells; trivially measurable (atomic σ-algebra)"));
  }
  for (const auto& c : res.phi.certificate) sel.checks.push_back(c);
  return res;
}

Corr glue_table(const Corr& psi, const Selection& sel, const Corr& fallback) {
  if (fallback.atoms() != psi.atoms() || fallback.nodes() != psi.nodes())
    throw DomainError("glue: fallback does not match Ψ's atoms and grid");
  if (!sel.grid || sel.grid->size() != psi.nodes() || sel.space->size() != psi.atoms())
    throw DomainError("glue: selection does not match Ψ's atoms and grid");
  if (sel.domain() != domain(psi)) throw DomainError("glue: selection domain differs from U_Ψ");
  const int d = fallback.value_dim();
  if (sel.value_dim != d) throw DomainError("glue: selection and fallback differ in value dimension");
  return Corr::from_function(psi.space_ptr(), psi.grid_ptr(), d, [&](std::size_t t, std::size_t z) {
    if (psi.nonempty(t, z)) return PointSet(d, {sel.at(t, z)});
    if (fallback.at(t, z).empty())
      throw PreconditionError("glue: fallback is empty off U_Ψ at " + node_name(psi.space(), t, z));
    return fallback.at(t, z);
  });
}

GlueResult glue(const Corr& psi, const Selection& sel, const Corr& fallback, const InfoPartition& part, double eps) {
  GlueResult res{glue_table(psi, sel, fallback), {}};
  const Corr& g = res.g;
  auto all_atoms = [&](auto&& pred) {
    for (std::size_t t = 0; t < psi.atoms(); ++t)
      if (!pred(t)) return false;
    return true;
  };
  res.claims.push_back({"usc preserved", all_atoms([&](std::size_t t) { return usc_check(fallback, t, eps).ok; }),
                        all_atoms([&](std::size_t t) { return usc_check(g, t, eps).ok; })});
  res.claims.push_back({"lsc preserved", all_atoms([&](std::size_t t) { return lsc_check(fallback, t, eps).ok; }),
                        all_atoms([&](std::size_t t) { return lsc_check(g, t, eps).ok; })});
  bool joint_premise = true, joint_conclusion = true, any_section = false, sections_hold = true;
  for (std::size_t x = 0; x < psi.nodes(); ++x) {
    const bool p = lower_measurable_check(fallback, part, x);
    const bool c = lower_measurable_check(g, part, x);
    joint_premise = joint_premise && p;
    joint_conclusion = joint_conclusion && c;
    if (p) {
      any_section = true;
      sections_hold = sections_hold && c;
    }
  }
  res.claims.push_back({"joint lower measurability preserved", joint_premise, joint_conclusion});
  res.claims.push_back({"sectionwise lower measurability preserved", any_section, sections_hold});
  return res;
}

}  // namespace carasel
