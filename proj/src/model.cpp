#include "dcot/model.hpp"

#include <cmath>
#include <random>

#include "dcot/error.hpp"
#include "dcot/linalg.hpp"

namespace dcot {

namespace {

Index stride_of(const Shape& s, Index mode) {
  Index stride = 1;
  for (Index k = 0; k < mode; ++k) stride *= s.dim(k);
  return stride;
}

// Calls fn(linear_index_in_first_slice) for every cell of the group's first
// slice; other slices are reached by adding (slice - first) * stride.
template <typename Fn>
void for_each_anchor(const Shape& s, Index mode, const SliceGroup& g, Fn&& fn) {
  std::vector<Index> idx(s.order());
  const Index first = g.slices.front();
  for (Index lin = 0; lin < s.size(); ++lin) {
    s.multi_index(lin, idx);
    if (idx[mode] != first) continue;
    if (g.fixed && idx[g.fixed->mode] != g.fixed->index) continue;
    fn(lin);
  }
}

// Column-wise sign fix: largest-magnitude entry positive.
void canonicalize_signs(DenseMatrix& u) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index arg = 0;
    for (Index i = 1; i < u.rows(); ++i)
      if (std::abs(u(i, j)) > std::abs(u(arg, j))) arg = i;
    if (u(arg, j) < 0)
      for (Index i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
  }
}

}  // namespace

void SubjectPartition::validate(const Shape& core_shape) const {
  if (groups.empty()) return;
  if (mode >= core_shape.order()) throw DimensionError("partition: mode out of range");
  std::vector<bool> used(core_shape.size(), false);
  const Index stride = stride_of(core_shape, mode);
  for (const auto& g : groups) {
    if (g.slices.empty()) throw DimensionError("partition: empty group");
    for (Index s : g.slices)
      if (s >= core_shape.dim(mode)) throw DimensionError("partition: slice index out of range");
    if (g.fixed) {
      if (g.fixed->mode >= core_shape.order() || g.fixed->mode == mode)
        throw DimensionError("partition: fixed-index mode must be a different valid mode");
      if (g.fixed->index >= core_shape.dim(g.fixed->mode))
        throw DimensionError("partition: fixed index out of range");
    }
    for_each_anchor(core_shape, mode, g, [&](Index anchor) {
      for (Index s : g.slices) {
        const Index lin = anchor + (s - g.slices.front()) * stride;
        if (used[lin]) throw DimensionError("partition: groups overlap");
        used[lin] = true;
      }
    });
  }
}

Shape DcotModel::data_shape() const {
  std::vector<Index> dims;
  dims.reserve(factors.size());
  for (const auto& u : factors) dims.push_back(u.rows());
  return Shape(std::move(dims));
}

void DcotModel::validate() const {
  if (factors.size() != core_g.order()) throw DimensionError("model: need one factor per core mode");
  if (!(core_g.shape() == core_h.shape())) throw DimensionError("model: G and H shapes differ");
  for (Index n = 0; n < factors.size(); ++n)
    if (factors[n].cols() != core_g.shape().dim(n))
      throw DimensionError("model: factor " + std::to_string(n) + " columns do not match core");
  partition.validate(core_g.shape());
}

DenseTensor reconstruct(const DcotModel& model) {
  model.validate();
  return multilinear_product(model.core_g + model.core_h, model.factors);
}

std::vector<DenseMatrix> init_factors(const DenseTensor& x, const std::vector<Index>& ranks,
                                      const InitStrategy& strategy) {
  const Shape& s = x.shape();
  if (ranks.size() != s.order()) throw DimensionError("init_factors: need one rank per mode");
  std::vector<DenseMatrix> factors;
  factors.reserve(ranks.size());
  for (Index n = 0; n < ranks.size(); ++n) {
    if (ranks[n] == 0) throw DimensionError("init_factors: ranks must be positive");
    if (ranks[n] > s.dim(n)) throw DimensionError("init_factors: rank exceeds mode size in mode " + std::to_string(n));
    if (strategy.kind == InitKind::identity && ranks[n] != s.dim(n))
      throw DimensionError("init_factors: identity initialization requires rank == mode size");
  }

  switch (strategy.kind) {
    case InitKind::identity:
      for (Index n = 0; n < ranks.size(); ++n) factors.push_back(DenseMatrix::identity(s.dim(n)));
      break;
    case InitKind::random: {
      std::mt19937_64 rng(strategy.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Index n = 0; n < ranks.size(); ++n) {
        DenseMatrix u(s.dim(n), ranks[n]);
        for (double& v : u.data()) v = normal(rng);
        factors.push_back(std::move(u));
      }
      break;
    }
    case InitKind::hosvd:
      for (Index n = 0; n < ranks.size(); ++n) {
        const DenseMatrix a = matricize(x, n);
        const auto eig = symmetric_eigen(matmul_nt(a, a));
        DenseMatrix u(s.dim(n), ranks[n]);
        for (Index j = 0; j < ranks[n]; ++j)
          for (Index i = 0; i < s.dim(n); ++i) u(i, j) = eig.vectors(i, j);
        canonicalize_signs(u);
        factors.push_back(std::move(u));
      }
      break;
  }
  return factors;
}

DenseTensor project_core(const DenseTensor& x, const std::vector<DenseMatrix>& factors) {
  return multilinear_product_transposed(x, factors);
}

DenseTensor tie_heterogeneous_core(const DenseTensor& h, const SubjectPartition& partition, TieReducer reducer) {
  partition.validate(h.shape());
  DenseTensor out = h;
  const Index stride = stride_of(h.shape(), partition.mode);
  for (const auto& g : partition.groups) {
    if (g.slices.size() < 2) continue;
    const Index first = g.slices.front();
    for_each_anchor(h.shape(), partition.mode, g, [&](Index anchor) {
      auto at = [&](Index s) { return anchor + s * stride - first * stride; };
      double value = 0.0;
      bool equal = true;
      for (Index s : g.slices) equal = equal && h[at(s)] == h[at(first)];
      if (reducer == TieReducer::mean && !equal) {
        // Already-tied cells are left alone so the reducer is idempotent bitwise.
        for (Index s : g.slices) value += h[at(s)];
        value /= static_cast<double>(g.slices.size());
      } else {
        value = h[at(first)];
      }
      for (Index s : g.slices) out[at(s)] = value;
    });
  }
  return out;
}

bool is_tied(const DenseTensor& h, const SubjectPartition& partition) {
  const Index stride = stride_of(h.shape(), partition.mode);
  bool tied = true;
  for (const auto& g : partition.groups) {
    const Index first = g.slices.front();
    for_each_anchor(h.shape(), partition.mode, g, [&](Index anchor) {
      for (Index s : g.slices)
        if (h[anchor + s * stride - first * stride] != h[anchor]) tied = false;
    });
  }
  return tied;
}

DcotModel initialize_model(const DenseTensor& x, const std::vector<Index>& ranks, const InitStrategy& strategy,
                           SubjectPartition partition, TieReducer reducer) {
  DcotModel m;
  m.factors = init_factors(x, ranks, strategy);
  m.core_g = project_core(x, m.factors);
  m.core_h = tie_heterogeneous_core(m.core_g, partition, reducer);
  m.partition = std::move(partition);
  m.validate();
  return m;
}

}  // namespace dcot
