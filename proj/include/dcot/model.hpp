#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcot/tensor.hpp"

namespace dcot {

/// Restricts a group to the cells whose coordinate along `mode` equals `index`.
struct FixedIndex {
  Index mode = 0;
  Index index = 0;
  friend bool operator==(const FixedIndex&, const FixedIndex&) = default;
};

/// Slices (along the partition mode) that must carry identical sub-tensors.
struct SliceGroup {
  std::vector<Index> slices;
  std::optional<FixedIndex> fixed;
  friend bool operator==(const SliceGroup&, const SliceGroup&) = default;
};

/// Subject structure of the heterogeneous core. Every group ties slices of
/// the core along one mode; an optional fixed index narrows a group to the
/// cells H(.., s, .., k, ..) with a second coordinate held at k.
struct SubjectPartition {
  Index mode = 0;
  std::vector<SliceGroup> groups;

  bool empty() const noexcept { return groups.empty(); }
  /// Throws DimensionError unless the groups are in range, nonempty and
  /// pairwise disjoint (at the cell level) for a core of this shape.
  void validate(const Shape& core_shape) const;

  friend bool operator==(const SubjectPartition&, const SubjectPartition&) = default;
};

enum class TieReducer { mean, representative };

struct DcotModel {
  std::vector<DenseMatrix> factors;  // U^(n), I_n x R_n
  DenseTensor core_g;                // R_1 x ... x R_N
  DenseTensor core_h;                // same shape as core_g
  SubjectPartition partition;

  Shape data_shape() const;
  Shape core_shape() const { return core_g.shape(); }
  /// Throws DimensionError if factor/core dimensions disagree.
  void validate() const;
};

/// (G + H) x_1 U^(1) ... x_N U^(N)
DenseTensor reconstruct(const DcotModel& model);

enum class InitKind { identity, random, hosvd };

struct InitStrategy {
  InitKind kind = InitKind::hosvd;
  std::uint64_t seed = 0;
};

std::vector<DenseMatrix> init_factors(const DenseTensor& x, const std::vector<Index>& ranks,
                                      const InitStrategy& strategy);

/// x x_1 U^(1)^T ... x_N U^(N)^T
DenseTensor project_core(const DenseTensor& x, const std::vector<DenseMatrix>& factors);

DenseTensor tie_heterogeneous_core(const DenseTensor& h, const SubjectPartition& partition,
                                   TieReducer reducer = TieReducer::mean);

/// True if every group's slices are bitwise equal.
bool is_tied(const DenseTensor& h, const SubjectPartition& partition);

/// Factors from `strategy`, G = project_core(x), H = tie(G).
DcotModel initialize_model(const DenseTensor& x, const std::vector<Index>& ranks, const InitStrategy& strategy,
                           SubjectPartition partition, TieReducer reducer = TieReducer::mean);

}  // namespace dcot
