#pragma once

// Random fixed points, random games (Nash and preference form), Bayesian games
// with a common information partition, and random maximal elements.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "carasel/check.hpp"
#include "carasel/corr.hpp"
#include "carasel/measure.hpp"
#include "carasel/selection.hpp"

namespace carasel {

struct FixedPointOptions {
  double tol = 1e-6;
  /// Damping of x ← (1−α)x + αψ(t,x).
  double alpha = 0.5;
  std::size_t max_iter = 20000;
  SelectOptions select;
};

struct FixedPointProfile {
  std::vector<Vec> values;
  std::vector<double> residuals;
  /// "damped iteration" or "grid minimization", per atom.
  std::vector<std::string> method;
  Selection selection;
  std::vector<Check> checks;

  bool ok() const { return all_pass(checks); }
};

/// ψ(t,·) extended off the grid: multilinear on box grids, inverse-distance weighting otherwise.
Vec interpolate(const Selection& sel, std::size_t t, const Vec& x);

/// Per-atom fixed point of the certified selection of Ψ; NoCertificateError when neither the damped
/// iteration nor the grid search gets below tol.
FixedPointProfile random_fixed_point(const Corr& psi, const CipWitness& w, const InfoPartition& part,
                                     const FixedPointOptions& opts = {});

/// Product of per-player strategy grids; joint node indices are mixed-radix with player 0 most significant.
class JointGrid {
 public:
  explicit JointGrid(std::vector<std::shared_ptr<const GridSpace>> grids);

  std::size_t players() const noexcept { return grids_.size(); }
  std::size_t size() const noexcept { return joint_->size(); }
  const GridSpace& player_grid(std::size_t i) const { return *grids_.at(i); }
  const std::shared_ptr<const GridSpace>& player_grid_ptr(std::size_t i) const { return grids_.at(i); }
  const std::shared_ptr<const GridSpace>& grid() const noexcept { return joint_; }
  std::vector<std::size_t> decode(std::size_t joint) const;
  std::size_t encode(const std::vector<std::size_t>& nodes) const;
  /// Joint node with player i's component replaced by node y.
  std::size_t with(std::size_t joint, std::size_t i, std::size_t y) const;
  /// Player i's node within a joint node.
  std::size_t component(std::size_t joint, std::size_t i) const;
  int offset(std::size_t i) const { return offsets_.at(i); }
  Vec block(const Vec& joint, std::size_t i) const;

 private:
  std::vector<std::shared_ptr<const GridSpace>> grids_;
  std::vector<std::size_t> strides_;
  std::vector<int> offsets_;
  std::shared_ptr<const GridSpace> joint_;
};

/// u_i(ω, x) evaluated at any joint strategy vector (not only grid nodes). Must be safe to call concurrently.
using PayoffFn = std::function<double(std::size_t player, std::size_t atom, const Vec& joint)>;

struct GameSpec {
  std::shared_ptr<const AtomSpace> space;
  std::vector<std::string> players;
  std::vector<std::shared_ptr<const GridSpace>> strategy_grids;
  PayoffFn payoff;
  std::vector<bool> concavity_declared;
};

/// u[i][t·|X| + x] on every joint node.
struct PayoffTables {
  std::vector<std::vector<double>> u;
  double at(std::size_t i, std::size_t t, std::size_t x, std::size_t nodes) const { return u[i][t * nodes + x]; }
};

PayoffTables tabulate(const GameSpec& g, const JointGrid& joint);

/// P_i(ω,x) = {y_i ∈ X_i : u_i(ω, y_i, x_{−i}) − u_i(ω, x) > strict_margin}, tabulated on Ω × joint grid.
Corr pref_from_payoff(const GameSpec& g, std::size_t i, double strict_margin = 0.0);
Corr pref_from_payoff(const GameSpec& g, const JointGrid& joint, const PayoffTables& tables, std::size_t i,
                      double strict_margin = 0.0);

/// A random game in preference form; payoffs are optional and only used to report regrets.
struct RandomGame {
  std::shared_ptr<const AtomSpace> space;
  std::shared_ptr<const JointGrid> joint;
  std::vector<std::shared_ptr<const Corr>> prefs;
  std::shared_ptr<const PayoffTables> payoffs;
};

struct EquilibriumOptions {
  SelectOptions select = [] {
    SelectOptions s;
    s.closed_valued = true;
    return s;
  }();
  std::uint64_t seed = 0;
  /// Random segments per player and atom for the concavity midpoint test.
  std::size_t spot_checks = 16;
  std::size_t max_joint_nodes = 10000;
};

struct EquilibriumCertificate {
  /// Joint node per atom, and the matching joint strategy vector.
  std::vector<std::size_t> profile;
  std::vector<Vec> profile_values;
  /// regret[t][i] = max_{y_i} u_i(ω_t, y_i, x*_{−i}) − u_i(ω_t, x*); empty without payoffs.
  std::vector<std::vector<double>> regret;
  double eps_eq = 0.0;
  std::vector<std::vector<std::size_t>> measurable_wrt;
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  bool ok() const { return all_pass(checks); }
};

/// Fixed point of Λ = Π F_i with F_i = {ψ_i} on U_{con P_i} and X_i elsewhere, per atom.
/// Among the fixed points the smallest worst regret wins (ties within 1e-12 by lowest joint index);
/// without payoffs the lowest joint index wins.
EquilibriumCertificate random_equilibrium(const RandomGame& game, const std::vector<CipWitness>& witnesses,
                                          const InfoPartition& part, double eps_eq,
                                          const EquilibriumOptions& opts = {});

/// Builds P_i with strict margin eps_eq and canonical witnesses, then solves random_equilibrium.
EquilibriumCertificate random_nash(const GameSpec& g, const InfoPartition& part, double eps_eq,
                                   const EquilibriumOptions& opts = {});

struct BayesSpec {
  GameSpec game;
  std::shared_ptr<const InfoPartition> partition;
  std::vector<Prior> priors;
};

/// h_i(ω,x) = Σ_{t∈E(ω)} q_i(t|E(ω)) u_i(t,x) μ(t), computed with weights q(t)μ(t)/Σ_E qμ.
double bayes_h(const BayesSpec& b, std::size_t i, std::size_t omega, const Vec& x);

/// random_nash on the derived game (X_i, h_i) under b.partition; ConstructionError if the profile varies within a cell.
EquilibriumCertificate bayes_equilibrium(const BayesSpec& b, double eps_eq, const EquilibriumOptions& opts = {});

struct MaximalElementResult {
  std::vector<std::size_t> nodes;
  std::vector<Vec> values;
  std::vector<Check> checks;

  bool ok() const { return all_pass(checks); }
};

/// x*(ω) with P(ω, x*(ω)) = ∅; the lowest such node index per atom.
MaximalElementResult maximal_element(const Corr& p, const CipWitness& w, const InfoPartition& part, double eps_eq,
                                     const EquilibriumOptions& opts = {});

}  // namespace carasel
