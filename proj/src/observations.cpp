#include "dcot/observations.hpp"

#include <cmath>

#include "dcot/error.hpp"

namespace dcot {

ObservationSet::ObservationSet(Shape shape) : shape_(std::move(shape)), lookup_(shape_.size(), -1) {}

ObservationSet::ObservationSet(Shape shape, std::vector<Observation> entries) : ObservationSet(std::move(shape)) {
  entries_.reserve(entries.size());
  linear_.reserve(entries.size());
  for (auto& e : entries) add(std::move(e.index), e.value);
}

ObservationSet ObservationSet::from_dense(const DenseTensor& t) {
  ObservationSet set(t.shape());
  set.entries_.reserve(t.size());
  set.linear_.reserve(t.size());
  for (Index k = 0; k < t.size(); ++k) set.add(t.shape().multi_index(k), t[k]);
  return set;
}

void ObservationSet::add(std::vector<Index> index, double value) {
  if (!std::isfinite(value)) throw DomainError("observation value must be finite");
  const Index lin = shape_.linear_index(index);
  if (lookup_[lin] >= 0) throw DimensionError("duplicate observation index");
  lookup_[lin] = static_cast<std::ptrdiff_t>(entries_.size());
  linear_.push_back(lin);
  entries_.push_back({std::move(index), value});
}

std::optional<Index> ObservationSet::find(Index linear) const {
  if (linear >= lookup_.size() || lookup_[linear] < 0) return std::nullopt;
  return static_cast<Index>(lookup_[linear]);
}

double ObservationSet::mean() const {
  if (entries_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : entries_) s += e.value;
  return s / static_cast<double>(entries_.size());
}

double ObservationSet::frob_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return std::sqrt(s);
}

DenseTensor ObservationSet::to_dense(double fill) const {
  DenseTensor t(shape_, fill);
  for (Index k = 0; k < entries_.size(); ++k) t[linear_[k]] = entries_[k].value;
  return t;
}

}  // namespace dcot
