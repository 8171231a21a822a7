#pragma once

// Gluing construction Φ, grid selections, the interior-point series, certified
// Carathéodory-type selections and the selection/constraint gluing G.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carasel/check.hpp"
#include "carasel/corr.hpp"
#include "carasel/measure.hpp"
#include "carasel/setops.hpp"

namespace carasel {

/// A single-valued map on U_Ψ with its certified adjacent-pair modulus.
struct Selection {
  std::shared_ptr<const AtomSpace> space;
  std::shared_ptr<const GridSpace> grid;
  int value_dim = 0;
  /// Indexed by t·|Z| + z; engaged exactly on the domain.
  std::vector<std::optional<Vec>> values;
  std::vector<double> atom_modulus;
  double modulus = 0.0;
  std::vector<Check> checks;

  bool defined(std::size_t t, std::size_t z) const { return values.at(t * grid->size() + z).has_value(); }
  const Vec& at(std::size_t t, std::size_t z) const { return *values.at(t * grid->size() + z); }
  std::vector<Node> domain() const;
  bool ok() const { return all_pass(checks); }
};

struct PhiResult {
  Corr phi;
  /// (A)-(E), each computed from the tabulated Φ.
  std::vector<Check> certificate;
  bool kernel_empty = true;

  bool ok() const { return all_pass(certificate); }
};

/// Φ(t,x) = con ⋃{con F_z(t,x) : z ∈ J(t,x)} on U_Ψ, ∅ elsewhere; values stored as extreme points.
/// eps is the l.s.c. level used for property (C).
PhiResult construct_phi(const Corr& psi, const CipWitness& w, const InfoPartition& part, double eps);

struct GridSelectOptions {
  /// Nodes the caller claims lie in the domain; an empty Φ value there is an InconsistencyError.
  const std::vector<bool>* claimed = nullptr;
  /// Optional per-node anchor points pulling the solution towards them with weight anchor_weight.
  const std::vector<Vec>* anchors = nullptr;
  double anchor_weight = 1.0;
  std::size_t max_sweeps = 500;
  double stop_tol = 1e-10;
};

struct GridSelection {
  /// Indexed by node; engaged on U_Φ^t.
  std::vector<std::optional<Vec>> values;
  double modulus = 0.0;
  double energy = 0.0;
  std::size_t sweeps = 0;
};

/// Dirichlet-energy-minimal selection of the convex-valued Φ(t,·) by block-coordinate descent
/// (each block step is a projection onto Φ(t,z)). Membership is certified within tol.
GridSelection grid_select(const Corr& phi, std::size_t t, double tol, const GridSelectOptions& opts = {});

/// Σ_{i≤k_max} 2^{-i} z_i + 2^{-k_max} z_1 with z_i = y_i + (y_i − y_1)/max(1, ‖y_i − y_1‖);
/// the dense list is cycled when shorter than k_max.
Vec interior_series(const ConvexSet& b, const std::vector<Vec>& dense, std::size_t k_max = 40);

struct SelectOptions {
  bool closed_valued = false;
  double tol = 1e-7;
  /// l.s.c. level for the CIP check; defaults to the witness's whole-grid excess.
  std::optional<double> eps;
  std::size_t k_max = 40;
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  bool strict_cip = false;
};

struct SelectResult {
  Selection selection;
  PhiResult phi;
  double eps = 0.0;
};

/// Certified Carathéodory-type selection of con Ψ on U_Ψ.
/// Throws PreconditionError when the CIP check fails and ConstructionError when membership does.
SelectResult caratheodory_select(const Corr& psi, const CipWitness& w, const InfoPartition& part,
                                 const SelectOptions& opts = {});

/// One preservation statement of the gluing construction, evaluated on the grid.
struct GlueClaim {
  std::string name;
  bool premise = false;
  bool conclusion = false;
  bool holds() const { return !premise || conclusion; }
};

struct GlueResult {
  Corr g;
  std::vector<GlueClaim> claims;
};

/// G = {ψ} on U_Ψ and the fallback elsewhere, with the four preservation claims (usc, lsc, joint
/// and sectionwise lower measurability) evaluated at eps.
GlueResult glue(const Corr& psi, const Selection& sel, const Corr& fallback, const InfoPartition& part, double eps);

/// G without evaluating the claims.
Corr glue_table(const Corr& psi, const Selection& sel, const Corr& fallback);

}  // namespace carasel
