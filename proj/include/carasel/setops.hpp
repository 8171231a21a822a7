#pragma once

// Finite geometry for set values: point sets, V-polytopes, Hausdorff distance,
// eps-neighbourhoods, hull projection, interiors, and Li/Ls limits of finite
// set sequences.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace carasel {

using Vec = Eigen::VectorXd;

/// Points closer than this are the same point.
inline constexpr double kPointTol = 1e-12;
/// Default residual tolerance for hull membership.
inline constexpr double kMembershipTol = 1e-9;
/// Default cluster radius for Li/Ls on finite sequences.
inline constexpr double kClusterTol = 1e-6;

Vec make_vec(std::initializer_list<double> xs);

/// A finite (possibly empty) set of points in R^dim.
///
/// Duplicates within kPointTol are dropped on construction; the first
/// occurrence wins, so the order of the remaining points is the input order.
class PointSet {
 public:
  explicit PointSet(int dim);
  PointSet(int dim, std::vector<Vec> points);

  /// Convenience for literals: every inner list is one point.
  static PointSet of(std::initializer_list<std::initializer_list<double>> pts);

  int dim() const noexcept { return dim_; }
  const std::vector<Vec>& points() const noexcept { return points_; }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t size() const noexcept { return points_.size(); }
  const Vec& operator[](std::size_t i) const { return points_[i]; }

  /// True when some listed point is within tol of x.
  bool has_point_near(const Vec& x, double tol) const;

 private:
  int dim_;
  std::vector<Vec> points_;
};

/// Set equality up to tol: every point of one has a point of the other within tol.
bool same_points(const PointSet& a, const PointSet& b, double tol);

/// A V-polytope con{vertices}; never empty.
class ConvexSet {
 public:
  ConvexSet(int dim, std::vector<Vec> vertices);
  explicit ConvexSet(const PointSet& generators);

  int dim() const noexcept { return dim_; }
  const std::vector<Vec>& vertices() const noexcept { return vertices_; }
  Vec centroid() const;

 private:
  int dim_;
  std::vector<Vec> vertices_;
};

struct SetSequence {
  int dim;
  std::vector<PointSet> terms;

  SetSequence(int dim, std::vector<PointSet> terms);
};

/// Nearest point of con(vertices) to x, with the convex weights that produce it.
struct HullProjection {
  Vec point;
  Eigen::VectorXd weights;
  double distance;
};

/// Minimum-norm-point (Wolfe) projection onto the convex hull of a vertex list.
HullProjection project_onto_hull(const Vec& x, std::span<const Vec> vertices);

double dist_to_hull(const Vec& x, std::span<const Vec> vertices);

/// dist(x, B) over the listed points of B; +inf for empty B.
double point_dist(const Vec& x, const PointSet& b);

/// sup_{x in a} dist(x, b) over listed points; 0 for empty a.
double excess(const PointSet& a, const PointSet& b);

/// sup_{x in con a} dist(x, con b). Attained at a vertex of a because dist to a convex set is convex.
double hull_excess(const PointSet& a, const PointSet& b);

/// Hausdorff distance between two nonempty finite point sets.
double hausdorff_dist(const PointSet& a, const PointSet& b);

/// Hausdorff distance between con a and con b.
double hausdorff_hull_dist(const PointSet& a, const PointSet& b);

/// a ⊆ N_eps(b), with N_eps the open eps-neighbourhood. Vacuously true for empty a.
bool eps_neighborhood_contains(const PointSet& a, const PointSet& b, double eps);

/// con a ⊆ N_eps(con b).
bool hull_neighborhood_contains(const PointSet& a, const PointSet& b, double eps);

/// x ∈ c up to Euclidean residual tol.
bool convex_membership(const Vec& x, const ConvexSet& c, double tol = kMembershipTol);

/// Residual of the best convex combination of c's vertices reproducing x.
double membership_residual(const Vec& x, const ConvexSet& c);

/// Largest r >= 0 with B(x, r) ⊆ c; 0 when c has empty ambient interior or x ∉ c.
double interior_point_margin(const Vec& x, const ConvexSet& c);

/// Supporting halfspaces n·y <= b through every facet of a full-dimensional polytope.
struct Halfspaces {
  int dim = 0;
  bool full_dim = false;
  std::vector<Vec> normals;
  std::vector<double> offsets;
};

Halfspaces halfspaces(const ConvexSet& c);

/// Distance from x to the boundary when x is inside the polytope described by h, else 0.
double halfspace_margin(const Vec& x, const Halfspaces& h);

/// max over the listed vertices and the vertex centroid of interior_point_margin.
double max_interior_margin(const ConvexSet& c);

/// Dimension of the affine hull of the points (-1 for an empty list).
int affine_rank(std::span<const Vec> points);

/// Extreme points of con(points), in input order.
std::vector<Vec> extreme_points(std::span<const Vec> points);

/// Finite surrogate of Li: points of the last `tail` terms that every one of those terms approaches within tol_cluster.
PointSet li_limit(const SetSequence& s, std::size_t tail, double tol_cluster = kClusterTol);

/// Finite surrogate of Ls: points approached by at least ceil(tail/2) of the last `tail` terms.
PointSet ls_limit(const SetSequence& s, std::size_t tail, double tol_cluster = kClusterTol);

}  // namespace carasel
