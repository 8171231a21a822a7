#include "carasel/setops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "carasel/errors.hpp"

namespace carasel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(int a, int b, const char* what) {
  if (a != b) throw DomainError(std::string(what) + ": dimension mismatch");
}

double scale_of(std::span<const Vec> pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

bool lex_greater(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

// Affine minimizer of |P a| subject to sum(a) = 1 over the columns of P.
Eigen::VectorXd affine_min(const Eigen::MatrixXd& p) {
  const Eigen::Index k = p.cols();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = p.transpose() * p;
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs[k] = 1.0;
  Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd a = sol.head(k);
  const double s = a.sum();
  if (std::abs(s) > 1e-300) a /= s;
  return a;
}

}  // namespace

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

PointSet::PointSet(int dim) : dim_(dim) {
  if (dim < 0) throw DomainError("PointSet: negative dimension");
}

PointSet::PointSet(int dim, std::vector<Vec> points) : PointSet(dim) {
  points_.reserve(points.size());
  for (auto& p : points) {
    require_dim(static_cast<int>(p.size()), dim, "PointSet");
    if (!p.allFinite()) throw DomainError("PointSet: non-finite coordinate");
    if (!has_point_near(p, kPointTol)) points_.push_back(std::move(p));
  }
}

PointSet PointSet::of(std::initializer_list<std::initializer_list<double>> pts) {
  if (pts.size() == 0) throw DomainError("PointSet::of: use PointSet(dim) for the empty set");
  std::vector<Vec> v;
  for (const auto& p : pts) v.push_back(make_vec(p));
  const int d = static_cast<int>(v.front().size());
  return PointSet(d, std::move(v));
}

bool PointSet::has_point_near(const Vec& x, double tol) const {
  for (const auto& p : points_) {
    if ((p - x).norm() <= tol) return true;
  }
  return false;
}

bool same_points(const PointSet& a, const PointSet& b, double tol) {
  if (a.dim() != b.dim()) return false;
  for (const auto& p : a.points())
    if (!b.has_point_near(p, tol)) return false;
  for (const auto& p : b.points())
    if (!a.has_point_near(p, tol)) return false;
  return true;
}

ConvexSet::ConvexSet(int dim, std::vector<Vec> vertices) : dim_(dim) {
  PointSet ps(dim, std::move(vertices));
  if (ps.empty()) throw DomainError("ConvexSet: no vertices");
  vertices_ = ps.points();
}

ConvexSet::ConvexSet(const PointSet& generators) : ConvexSet(generators.dim(), generators.points()) {}

Vec ConvexSet::centroid() const {
  Vec c = Vec::Zero(dim_);
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

SetSequence::SetSequence(int d, std::vector<PointSet> t) : dim(d), terms(std::move(t)) {
  for (const auto& s : terms) require_dim(s.dim(), d, "SetSequence");
}

HullProjection project_onto_hull(const Vec& x, std::span<const Vec> vertices) {
  const std::size_t m = vertices.size();
  if (m == 0) throw DomainError("project_onto_hull: empty vertex list");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd p(n, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    require_dim(static_cast<int>(vertices[k].size()), static_cast<int>(n), "project_onto_hull");
    p.col(static_cast<Eigen::Index>(k)) = vertices[k] - x;
  }
  double scale = 1.0;
  for (Eigen::Index k = 0; k < p.cols(); ++k) scale = std::max(scale, p.col(k).norm());
  const double stop_tol = 1e-14 * scale * scale;

  Eigen::Index k0 = 0;
  p.colwise().squaredNorm().minCoeff(&k0);
  std::vector<Eigen::Index> set{k0};
  std::vector<double> lam{1.0};
  Vec w = p.col(k0);

  const int max_major = 50 * static_cast<int>(m + static_cast<std::size_t>(n)) + 100;
  for (int major = 0; major < max_major; ++major) {
    Eigen::VectorXd g = p.transpose() * w;
    Eigen::Index j = 0;
    g.minCoeff(&j);
    if (w.squaredNorm() - g[j] <= stop_tol) break;
    if (std::find(set.begin(), set.end(), j) != set.end()) break;
    set.push_back(j);
    lam.push_back(0.0);

    for (int minor = 0; minor < 4 * static_cast<int>(m) + 10; ++minor) {
      Eigen::MatrixXd ps(n, static_cast<Eigen::Index>(set.size()));
      for (std::size_t i = 0; i < set.size(); ++i) ps.col(static_cast<Eigen::Index>(i)) = p.col(set[i]);
      Eigen::VectorXd a = affine_min(ps);
      bool positive = true;
      for (Eigen::Index i = 0; i < a.size(); ++i) positive = positive && a[i] > 1e-15;
      if (positive) {
        for (std::size_t i = 0; i < set.size(); ++i) lam[i] = a[static_cast<Eigen::Index>(i)];
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double ai = a[static_cast<Eigen::Index>(i)];
        if (ai <= 1e-15 && lam[i] - ai > 0) theta = std::min(theta, lam[i] / (lam[i] - ai));
      }
      for (std::size_t i = 0; i < set.size(); ++i) lam[i] += theta * (a[static_cast<Eigen::Index>(i)] - lam[i]);
      // Drop the coordinates that hit zero; always drop at least the smallest.
      std::size_t smallest = 0;
      for (std::size_t i = 1; i < lam.size(); ++i)
        if (lam[i] < lam[smallest]) smallest = i;
      std::vector<Eigen::Index> ns;
      std::vector<double> nl;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == smallest || lam[i] <= 1e-15) continue;
        ns.push_back(set[i]);
        nl.push_back(lam[i]);
      }
      if (ns.empty()) {
        ns.push_back(set[smallest == 0 && set.size() > 1 ? 1 : 0]);
        nl.push_back(1.0);
      }
      const double total = std::accumulate(nl.begin(), nl.end(), 0.0);
      for (auto& l : nl) l /= total;
      set = std::move(ns);
      lam = std::move(nl);
    }
    Vec nw = Vec::Zero(n);
    for (std::size_t i = 0; i < set.size(); ++i) nw += lam[i] * p.col(set[i]);
    if (nw.squaredNorm() >= w.squaredNorm() - 1e-30) {
      w = nw;
      break;
    }
    w = nw;
  }

  HullProjection out;
  out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  out.point = Vec::Zero(n);
  for (std::size_t i = 0; i < set.size(); ++i) {
    out.weights[set[i]] = lam[i];
    out.point += lam[i] * vertices[static_cast<std::size_t>(set[i])];
  }
  out.distance = (out.point - x).norm();
  return out;
}

double dist_to_hull(const Vec& x, std::span<const Vec> vertices) {
  return project_onto_hull(x, vertices).distance;
}

double point_dist(const Vec& x, const PointSet& b) {
  require_dim(static_cast<int>(x.size()), b.dim(), "point_dist");
  double best = kInf;
  for (const auto& p : b.points()) best = std::min(best, (p - x).norm());
  return best;
}

double excess(const PointSet& a, const PointSet& b) {
  require_dim(a.dim(), b.dim(), "excess");
  double worst = 0.0;
  for (const auto& p : a.points()) worst = std::max(worst, point_dist(p, b));
  return worst;
}

double hull_excess(const PointSet& a, const PointSet& b) {
  require_dim(a.dim(), b.dim(), "hull_excess");
  if (a.empty()) return 0.0;
  if (b.empty()) return kInf;
  double worst = 0.0;
  for (const auto& p : a.points()) worst = std::max(worst, dist_to_hull(p, b.points()));
  return worst;
}

double hausdorff_dist(const PointSet& a, const PointSet& b) {
  require_dim(a.dim(), b.dim(), "hausdorff_dist");
  if (a.empty() || b.empty()) throw DomainError("hausdorff_dist: empty set");
  return std::max(excess(a, b), excess(b, a));
}

double hausdorff_hull_dist(const PointSet& a, const PointSet& b) {
  require_dim(a.dim(), b.dim(), "hausdorff_hull_dist");
  if (a.empty() || b.empty()) throw DomainError("hausdorff_hull_dist: empty set");
  return std::max(hull_excess(a, b), hull_excess(b, a));
}

bool eps_neighborhood_contains(const PointSet& a, const PointSet& b, double eps) {
  require_dim(a.dim(), b.dim(), "eps_neighborhood_contains");
  for (const auto& p : a.points())
    if (!(point_dist(p, b) < eps)) return false;
  return true;
}

bool hull_neighborhood_contains(const PointSet& a, const PointSet& b, double eps) {
  if (a.empty()) return true;
  return hull_excess(a, b) < eps;
}

double membership_residual(const Vec& x, const ConvexSet& c) {
  require_dim(static_cast<int>(x.size()), c.dim(), "convex_membership");
  return dist_to_hull(x, c.vertices());
}

bool convex_membership(const Vec& x, const ConvexSet& c, double tol) {
  const double r = membership_residual(x, c);
  // Floor so that exact vertices survive rounding in the projection.
  const double floor = 16 * std::numeric_limits<double>::epsilon() * scale_of(c.vertices());
  return r <= tol + floor;
}

int affine_rank(std::span<const Vec> points) {
  if (points.empty()) return -1;
  if (points.size() == 1) return 0;
  const Eigen::Index n = points[0].size();
  Eigen::MatrixXd d(n, static_cast<Eigen::Index>(points.size() - 1));
  for (std::size_t k = 1; k < points.size(); ++k)
    d.col(static_cast<Eigen::Index>(k - 1)) = points[k] - points[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  const double tol = 1e-10 * scale_of(points);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

std::vector<Vec> extreme_points(std::span<const Vec> points) {
  if (points.empty()) return {};
  const int dim = static_cast<int>(points[0].size());
  PointSet unique(dim, std::vector<Vec>(points.begin(), points.end()));
  const auto& pts = unique.points();
  if (pts.size() <= 2) return pts;
  const double tol = 1e-12 * scale_of(pts);

  std::vector<std::size_t> chosen;
  auto chosen_points = [&] {
    std::vector<Vec> e;
    for (auto i : chosen) e.push_back(pts[i]);
    return e;
  };
  auto support = [&](const Vec& u) {
    double best = -kInf;
    for (const auto& q : pts) best = std::max(best, u.dot(q));
    std::size_t arg = pts.size();
    const double slack = 1e-12 * scale_of(pts) * std::max(1.0, u.norm());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (u.dot(pts[k]) >= best - slack && (arg == pts.size() || lex_greater(pts[k], pts[arg]))) arg = k;
    }
    return arg;
  };

  std::size_t first = 0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    if (lex_greater(pts[k], pts[first])) first = k;
  chosen.push_back(first);

  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (std::size_t guard = 0; guard <= pts.size(); ++guard) {
      const auto e = chosen_points();
      const auto proj = project_onto_hull(pts[k], e);
      if (proj.distance <= tol) break;
      const Vec u = pts[k] - proj.point;
      std::size_t q = support(u);
      if (std::find(chosen.begin(), chosen.end(), q) != chosen.end()) q = k;
      chosen.push_back(q);
      if (q == k) break;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  return chosen_points();
}

namespace {

// Visits every r-subset of {0..n-1} in lexicographic order; stops when f returns false.
template <class F>
void for_each_subset(std::size_t n, std::size_t r, F&& f) {
  if (r > n) return;
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (!f(idx)) return;
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Halfspaces halfspaces(const ConvexSet& c) {
  Halfspaces h;
  const int d = c.dim();
  h.dim = d;
  const auto ext = extreme_points(c.vertices());
  if (d == 0 || affine_rank(ext) < d) return h;
  h.full_dim = true;
  const double tol = 1e-10 * scale_of(ext);
  if (d == 1) {
    double lo = kInf, hi = -kInf;
    for (const auto& v : ext) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    h.normals = {make_vec({1.0}), make_vec({-1.0})};
    h.offsets = {hi, -lo};
    return h;
  }
  const auto ud = static_cast<std::size_t>(d);
  for_each_subset(ext.size(), ud, [&](const std::vector<std::size_t>& s) {
    Eigen::MatrixXd rows(d - 1, d);
    for (std::size_t i = 1; i < ud; ++i)
      rows.row(static_cast<Eigen::Index>(i - 1)) = (ext[s[i]] - ext[s[0]]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] <= tol) return true;
    Vec nrm = svd.matrixV().col(d - 1);
    double b = nrm.dot(ext[s[0]]);
    bool all_le = true, all_ge = true;
    for (const auto& v : ext) {
      const double side = nrm.dot(v) - b;
      all_le = all_le && side <= tol;
      all_ge = all_ge && side >= -tol;
    }
    if (!all_le && !all_ge) return true;
    if (!all_le) {
      nrm = -nrm;
      b = -b;
    }
    h.normals.push_back(std::move(nrm));
    h.offsets.push_back(b);
    return true;
  });
  return h;
}

double halfspace_margin(const Vec& x, const Halfspaces& h) {
  if (!h.full_dim) return 0.0;
  require_dim(static_cast<int>(x.size()), h.dim, "halfspace_margin");
  double margin = kInf;
  for (std::size_t k = 0; k < h.normals.size(); ++k) margin = std::min(margin, h.offsets[k] - h.normals[k].dot(x));
  if (!std::isfinite(margin)) return 0.0;
  // Points within rounding of the boundary count as boundary points.
  return margin > 1e-12 ? margin : 0.0;
}

double interior_point_margin(const Vec& x, const ConvexSet& c) {
  require_dim(static_cast<int>(x.size()), c.dim(), "interior_point_margin");
  return halfspace_margin(x, halfspaces(c));
}

double max_interior_margin(const ConvexSet& c) {
  const auto h = halfspaces(c);
  double best = halfspace_margin(c.centroid(), h);
  for (const auto& v : c.vertices()) best = std::max(best, halfspace_margin(v, h));
  return best;
}

namespace {

PointSet tail_candidates(const SetSequence& s, std::size_t tail) {
  if (tail == 0 || tail > s.terms.size()) throw DomainError("li/ls: tail must be in [1, number of terms]");
  std::vector<Vec> pts;
  for (std::size_t k = s.terms.size() - tail; k < s.terms.size(); ++k)
    for (const auto& p : s.terms[k].points()) pts.push_back(p);
  return PointSet(s.dim, std::move(pts));
}

PointSet limit_with_count(const SetSequence& s, std::size_t tail, double tol, std::size_t needed) {
  const PointSet cand = tail_candidates(s, tail);
  std::vector<Vec> out;
  for (const auto& x : cand.points()) {
    std::size_t hits = 0;
    for (std::size_t k = s.terms.size() - tail; k < s.terms.size(); ++k)
      if (s.terms[k].has_point_near(x, tol)) ++hits;
    if (hits >= needed) out.push_back(x);
  }
  return PointSet(s.dim, std::move(out));
}

}  // namespace

PointSet li_limit(const SetSequence& s, std::size_t tail, double tol_cluster) {
  return limit_with_count(s, tail, tol_cluster, tail);
}

PointSet ls_limit(const SetSequence& s, std::size_t tail, double tol_cluster) {
  return limit_with_count(s, tail, tol_cluster, (tail + 1) / 2);
}

}  // namespace carasel
