#pragma once

// Finite atomic measure spaces, information partitions and priors.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace carasel {

/// Finitely many atoms with strictly positive weights.
class AtomSpace {
 public:
  AtomSpace(std::vector<std::string> labels, std::vector<double> weights);

  /// n atoms labelled "w0".."w{n-1}", each of weight 1/n.
  static AtomSpace uniform(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t t) const { return weights_.at(t); }
  /// Index of a label; DomainError if unknown.
  std::size_t index_of(const std::string& label) const;
  double total() const;

 private:
  std::vector<std::string> labels_;
  std::vector<double> weights_;
};

/// A partition of the atom indices into disjoint nonempty cells.
class InfoPartition {
 public:
  InfoPartition(std::shared_ptr<const AtomSpace> space, std::vector<std::vector<std::size_t>> cells);

  /// Every atom in its own cell.
  static InfoPartition finest(std::shared_ptr<const AtomSpace> space);
  /// One cell holding every atom.
  static InfoPartition trivial(std::shared_ptr<const AtomSpace> space);

  const AtomSpace& space() const noexcept { return *space_; }
  const std::shared_ptr<const AtomSpace>& space_ptr() const noexcept { return space_; }
  const std::vector<std::vector<std::size_t>>& cells() const noexcept { return cells_; }
  std::size_t cell_of(std::size_t atom) const { return cell_of_.at(atom); }
  const std::vector<std::size_t>& cell_containing(std::size_t atom) const { return cells_[cell_of(atom)]; }
  bool is_finest() const noexcept { return cells_.size() == space_->size(); }

 private:
  std::shared_ptr<const AtomSpace> space_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<std::size_t> cell_of_;
};

/// A probability density q with respect to the atom weights.
class Prior {
 public:
  Prior(std::shared_ptr<const AtomSpace> space, std::vector<double> density);

  /// q ≡ 1 / total weight.
  static Prior uniform(std::shared_ptr<const AtomSpace> space);

  const AtomSpace& space() const noexcept { return *space_; }
  const std::vector<double>& density() const noexcept { return density_; }

 private:
  std::shared_ptr<const AtomSpace> space_;
  std::vector<double> density_;
};

/// Σ_t f(t) μ(t).
double integrate(const AtomSpace& space, const std::vector<double>& f);
double integrate(const AtomSpace& space, const std::function<double(std::size_t)>& f);

/// t ↦ q(t | E(omega)): zero off the cell of omega, q(t) / Σ_{s∈E} q(s)μ(s) on it.
std::vector<double> conditional_density(const Prior& prior, const InfoPartition& part, std::size_t omega);

}  // namespace carasel
