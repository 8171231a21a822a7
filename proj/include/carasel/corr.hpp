#pragma once

// Tabulated correspondences T×Z → 2^Y on a finite grid, discrete
// semicontinuity and measurability checks, and the continuous inclusion
// property (CIP) with its witnesses.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carasel/check.hpp"
#include "carasel/measure.hpp"
#include "carasel/setops.hpp"

namespace carasel {

/// Finite eps-net of a metric space, embedded in R^m with the Euclidean metric.
class GridSpace {
 public:
  /// Shape of a product grid: counts[k] equally spaced nodes from lo[k] to hi[k], first axis slowest.
  struct Box {
    Vec lo;
    Vec hi;
    std::vector<std::size_t> counts;
  };

  /// mesh defaults to the largest nearest-neighbour distance; adjacency radius to 2·mesh.
  explicit GridSpace(std::vector<Vec> points, std::optional<double> mesh = {},
                     std::optional<double> adjacency_radius = {});

  static GridSpace uniform(double lo, double hi, std::size_t n, std::optional<double> adjacency_radius = {});
  static GridSpace box(const Vec& lo, const Vec& hi, std::vector<std::size_t> counts,
                       std::optional<double> adjacency_radius = {});

  std::size_t size() const noexcept { return points_.size(); }
  int dim() const noexcept { return dim_; }
  const std::vector<Vec>& points() const noexcept { return points_; }
  const Vec& point(std::size_t i) const { return points_.at(i); }
  double distance(std::size_t i, std::size_t j) const { return (points_[i] - points_[j]).norm(); }
  double mesh() const noexcept { return mesh_; }
  double adjacency_radius() const noexcept { return adjacency_; }
  double diameter() const noexcept { return diameter_; }
  /// Adjacent nodes of i (d < adjacency radius, excluding i), ascending.
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  bool adjacent(std::size_t i, std::size_t j) const;
  /// Unordered adjacent pairs (i < j), ascending.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }
  const std::optional<Box>& box_shape() const noexcept { return box_; }
  /// Index of the nearest node; ties go to the lower index.
  std::size_t nearest(const Vec& x) const;

 private:
  int dim_ = 0;
  std::vector<Vec> points_;
  double mesh_ = 0;
  double adjacency_ = 0;
  double diameter_ = 0;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::optional<Box> box_;
};

/// (atom, grid node) pair.
struct Node {
  std::size_t t;
  std::size_t z;
  friend bool operator==(const Node&, const Node&) = default;
  friend auto operator<=>(const Node&, const Node&) = default;
};

/// A correspondence tabulated on atoms × grid nodes; values are finite point sets (possibly empty).
class Corr {
 public:
  Corr(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid, int value_dim);
  Corr(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid, int value_dim,
       std::vector<PointSet> values);

  static Corr from_function(std::shared_ptr<const AtomSpace> space, std::shared_ptr<const GridSpace> grid,
                            int value_dim, const std::function<PointSet(std::size_t t, std::size_t z)>& f);

  std::size_t atoms() const noexcept { return space_->size(); }
  std::size_t nodes() const noexcept { return grid_->size(); }
  int value_dim() const noexcept { return value_dim_; }
  const AtomSpace& space() const noexcept { return *space_; }
  const GridSpace& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const AtomSpace>& space_ptr() const noexcept { return space_; }
  const std::shared_ptr<const GridSpace>& grid_ptr() const noexcept { return grid_; }
  const PointSet& at(std::size_t t, std::size_t z) const { return values_.at(t * nodes() + z); }
  bool nonempty(std::size_t t, std::size_t z) const { return !at(t, z).empty(); }
  const std::vector<PointSet>& values() const noexcept { return values_; }
  /// Same atoms, grid and value table.
  bool same_shape(const Corr& other) const;

 private:
  std::shared_ptr<const AtomSpace> space_;
  std::shared_ptr<const GridSpace> grid_;
  int value_dim_;
  std::vector<PointSet> values_;
};

/// U_Ψ in (atom, node) order.
std::vector<Node> domain(const Corr& psi);

struct SemicontinuityViolation {
  std::size_t z;
  std::size_t z_prime;
  Vec witness;
  double distance;
};

struct SemicontinuityReport {
  bool ok = true;
  /// Largest offending distance over all tested pairs (ok iff max_excess < eps).
  double max_excess = 0.0;
  std::vector<SemicontinuityViolation> violations;
};

/// Discrete l.s.c. at atom t: Ψ(t,z) ⊆ N_eps(Ψ(t,z')) for every adjacent pair of nonempty values.
/// With hull=true the test is on con Ψ, i.e. con Ψ(t,z) ⊆ N_eps(con Ψ(t,z')).
/// Each failing pair reports its farthest point as the witness.
SemicontinuityReport lsc_check(const Corr& psi, std::size_t t, double eps, bool hull = false);

/// Discrete u.s.c. at atom t: for adjacent z, z', the points of Ψ(t,z') that persist into some
/// neighbour of z' (within eps) lie in N_eps(Ψ(t,z)).
SemicontinuityReport usc_check(const Corr& psi, std::size_t t, double eps);

/// Cell-wise constancy of t ↦ Ψ(t,z) (tolerance 1e-9); a sufficient condition for lower measurability.
bool lower_measurable_check(const Corr& psi, const InfoPartition& part, std::size_t z);
inline constexpr const char* kLowerMeasurableLabel = "sufficient-condition check (cell-wise set constancy)";

enum class CipMode { atomic, shared, countable, indexed };

std::string to_string(CipMode mode);
CipMode cip_mode_from_string(const std::string& s);

/// The family {F_z, O_z^t}: one local correspondence per grid node and an open-ball radius on U_Ψ.
struct CipWitness {
  CipMode mode = CipMode::atomic;
  std::vector<std::shared_ptr<const Corr>> locals;
  /// Indexed by t·|Z| + z; engaged exactly on U_Ψ.
  std::vector<std::optional<double>> radii;
  /// Bounding box B for the indexed (strong, case c) mode.
  std::optional<std::pair<Vec, Vec>> bound;

  const Corr& local(std::size_t z) const { return *locals.at(z); }
  /// Radius of O_z^t, or nullopt when (t,z) ∉ U_Ψ.
  std::optional<double> radius(std::size_t t, std::size_t z, std::size_t nodes) const { return radii.at(t * nodes + z); }
};

/// F_z = Ψ for every z, r(t,z) = distance from z to the nearest node with Ψ(t,·) = ∅ (or beyond the diameter).
CipWitness canonical_witness(std::shared_ptr<const Corr> psi, CipMode mode = CipMode::shared);

/// One shared F and one radius for every (t,z) ∈ U_Ψ.
CipWitness shared_witness(const Corr& psi, std::shared_ptr<const Corr> f, double radius);

/// Structural consistency of a witness with Ψ; DomainError on mismatch.
void validate_witness(const Corr& psi, const CipWitness& w);

/// J(t,x) = {z : (t,z) ∈ U_Ψ, d(x,z) < r(t,z)}, ascending.
std::vector<std::size_t> index_set(const Corr& psi, const CipWitness& w, std::size_t t, std::size_t x);

struct CipFailure {
  std::string condition;  // "empty-local", "inclusion", "lsc"
  std::size_t t;
  std::size_t z;
  std::size_t x;
  std::size_t x_prime;  // second node for "lsc"; equals x otherwise
  double residual;
};

struct CipReport {
  bool ok = true;
  double max_inclusion_residual = 0.0;
  double max_lsc_excess = 0.0;
  std::vector<CipFailure> failures;
};

/// Checks conditions (i) and (ii) of the CIP on the grid at eps.
/// strict=true tests l.s.c. of con F_z(t,·) on the whole grid also for t ∈ U_Ψ^z.
CipReport cip_verify(const Corr& psi, const CipWitness& w, double eps, bool strict = false,
                     double tol = kMembershipTol);

/// Smallest eps (up to a 1e-9 relative pad) at which condition (ii) holds for this witness.
double witness_lsc_eps(const Corr& psi, const CipWitness& w, bool strict = false);

struct ScipReport {
  bool ok = true;
  CipReport cip;
  std::vector<Check> checks;
};

/// Strong CIP: cip_verify plus joint lower measurability of con F_z and the mode condition.
ScipReport scip_verify(const Corr& psi, const CipWitness& w, const InfoPartition& part, double eps,
                       bool strict = false);

/// Interior points of con F_z(t,x) over z ∈ J(t,x): listed points with positive margin, plus the vertex centroid when interior.
Corr k_operator(const Corr& psi, const CipWitness& w);

/// Pooled vertex lists of con F_z(t,x) over z ∈ c (a union of polytopes, not its hull). Indexed mode only.
PointSet n_operator(std::size_t t, std::size_t x, const std::vector<std::size_t>& c, const CipWitness& w);

}  // namespace carasel
