#pragma once

#include <optional>
#include <vector>

#include "dcot/tensor.hpp"

namespace dcot {

struct Observation {
  std::vector<Index> index;  // 0-based multi-index
  double value = 0.0;
};

/// Observed entries of a tensor (the index set Omega and its values).
/// Entries are kept in insertion order; a dense lookup table maps every
/// cell of the shape to its position in `entries()` (or none).
class ObservationSet {
 public:
  ObservationSet() = default;
  explicit ObservationSet(Shape shape);
  ObservationSet(Shape shape, std::vector<Observation> entries);

  /// Every cell of `t`, in flat storage order.
  static ObservationSet from_dense(const DenseTensor& t);

  /// Throws DimensionError on an out-of-range or duplicate index, DomainError
  /// on a non-finite value.
  void add(std::vector<Index> index, double value);

  const Shape& shape() const noexcept { return shape_; }
  const std::vector<Observation>& entries() const noexcept { return entries_; }
  Index size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Flat offset of entry k.
  Index linear(Index k) const { return linear_.at(k); }
  /// Position in entries() of the entry at a flat offset, if observed.
  std::optional<Index> find(Index linear) const;
  bool contains(Index linear) const { return find(linear).has_value(); }

  double mean() const;
  double frob_norm() const;

  /// Dense tensor holding observed values and `fill` elsewhere.
  DenseTensor to_dense(double fill = 0.0) const;

 private:
  Shape shape_;
  std::vector<Observation> entries_;
  std::vector<Index> linear_;
  std::vector<std::ptrdiff_t> lookup_;  // -1 for unobserved
};

}  // namespace dcot
