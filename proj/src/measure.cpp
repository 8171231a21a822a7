#include "carasel/measure.hpp"

#include <cmath>
#include <unordered_set>

#include "carasel/errors.hpp"

namespace carasel {

AtomSpace::AtomSpace(std::vector<std::string> labels, std::vector<double> weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
  if (labels_.empty()) throw DomainError("AtomSpace: no atoms");
  if (labels_.size() != weights_.size()) throw DomainError("AtomSpace: labels and weights differ in length");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!seen.insert(labels_[i]).second) throw DomainError("AtomSpace: duplicate label " + labels_[i]);
    if (!(weights_[i] > 0) || !std::isfinite(weights_[i]))
      throw DomainError("AtomSpace: weight of " + labels_[i] + " must be positive and finite");
  }
}

AtomSpace AtomSpace::uniform(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
  return AtomSpace(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t AtomSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw DomainError("unknown atom " + label);
}

double AtomSpace::total() const {
  double s = 0;
  for (double w : weights_) s += w;
  return s;
}

InfoPartition::InfoPartition(std::shared_ptr<const AtomSpace> space, std::vector<std::vector<std::size_t>> cells)
    : space_(std::move(space)), cells_(std::move(cells)) {
  if (!space_) throw DomainError("InfoPartition: no atom space");
  const std::size_t n = space_->size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  cell_of_.assign(n, unset);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].empty()) throw DomainError("InfoPartition: empty cell");
    for (std::size_t t : cells_[c]) {
      if (t >= n) throw DomainError("InfoPartition: atom index out of range");
      if (cell_of_[t] != unset) throw DomainError("InfoPartition: cells overlap");
      cell_of_[t] = c;
    }
  }
  for (std::size_t t = 0; t < n; ++t)
    if (cell_of_[t] == unset) throw DomainError("InfoPartition: atom " + space_->labels()[t] + " not covered");
}

InfoPartition InfoPartition::finest(std::shared_ptr<const AtomSpace> space) {
  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t t = 0; t < space->size(); ++t) cells.push_back({t});
  return InfoPartition(std::move(space), std::move(cells));
}

InfoPartition InfoPartition::trivial(std::shared_ptr<const AtomSpace> space) {
  std::vector<std::size_t> all;
  for (std::size_t t = 0; t < space->size(); ++t) all.push_back(t);
  return InfoPartition(std::move(space), {all});
}

Prior::Prior(std::shared_ptr<const AtomSpace> space, std::vector<double> density)
    : space_(std::move(space)), density_(std::move(density)) {
  if (!space_) throw DomainError("Prior: no atom space");
  if (density_.size() != space_->size()) throw DomainError("Prior: density length differs from atom count");
  for (double q : density_)
    if (!(q > 0) || !std::isfinite(q)) throw DomainError("Prior: density must be positive and finite");
  const double mass = integrate(*space_, density_);
  if (std::abs(mass - 1.0) > 1e-9) throw DomainError("Prior: density does not integrate to 1");
}

Prior Prior::uniform(std::shared_ptr<const AtomSpace> space) {
  const double q = 1.0 / space->total();
  std::vector<double> d(space->size(), q);
  return Prior(std::move(space), std::move(d));
}

double integrate(const AtomSpace& space, const std::vector<double>& f) {
  if (f.size() != space.size()) throw DomainError("integrate: function length differs from atom count");
  double s = 0;
  for (std::size_t t = 0; t < f.size(); ++t) s += f[t] * space.weight(t);
  return s;
}

double integrate(const AtomSpace& space, const std::function<double(std::size_t)>& f) {
  double s = 0;
  for (std::size_t t = 0; t < space.size(); ++t) s += f(t) * space.weight(t);
  return s;
}

std::vector<double> conditional_density(const Prior& prior, const InfoPartition& part, std::size_t omega) {
  const auto& space = prior.space();
  if (&space != &part.space() && space.labels() != part.space().labels())
    throw DomainError("conditional_density: prior and partition live on different atom spaces");
  const auto& cell = part.cell_containing(omega);
  double mass = 0;
  for (std::size_t s : cell) mass += prior.density()[s] * space.weight(s);
  if (!(mass > 0)) throw PreconditionError("conditional_density: cell of " + space.labels()[omega] + " has zero mass");
  std::vector<double> out(space.size(), 0.0);
  for (std::size_t s : cell) out[s] = prior.density()[s] / mass;
  return out;
}

}  // namespace carasel
