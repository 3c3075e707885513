#pragma once

// Penalties J and their proximal maps
//   prox(p, t) = argmin_q  weight * J(q) + (t / 2) * ||q - p||^2,
// i.e. the penalty weight is carried by the Penalty and t is the
// linearization modulus. Every threshold below is therefore weight / t.

#include <string>
#include <vector>

#include "dcot/tensor.hpp"

namespace dcot {

enum class PenaltyKind { none, l1, frob_sq, nuclear, nonneg, sparse_group_lasso };

struct Penalty {
  PenaltyKind kind = PenaltyKind::none;
  double weight = 0.0;
  /// sparse_group_lasso only: disjoint groups of flat (storage-order) offsets.
  std::vector<std::vector<Index>> groups;
  /// sparse_group_lasso only: share of the weight on the l1 part; the rest
  /// goes to the sum of group l2 norms.
  double mix = 0.5;

  void validate(Index size) const;
};

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_from_string(const std::string& name);

/// weight * J(point); +infinity when a nonneg constraint is violated.
double penalty_value(const Penalty& p, const DenseTensor& point);
double penalty_value(const Penalty& p, const DenseMatrix& point);

/// Throws DomainError if t <= 0. A zero weight returns the point unchanged.
DenseTensor prox_apply(const Penalty& p, const DenseTensor& point, double t);
DenseMatrix prox_apply(const Penalty& p, const DenseMatrix& point, double t);

}  // namespace dcot
