#include "dcot/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "dcot/error.hpp"
#include "dcot/logging.hpp"

namespace dcot {

namespace {

struct Neighbor {
  Index j;
  double value;  // s * c
};

using NeighborLists = std::vector<std::vector<std::vector<Neighbor>>>;  // [mode][i] -> list

NeighborLists build_neighbors(const SimilarityModel& sim) {
  NeighborLists lists(sim.per_mode.size());
  for (Index n = 0; n < sim.per_mode.size(); ++n) {
    const auto& ms = sim.per_mode[n];
    const Index dim = ms.s.rows();
    lists[n].resize(dim);
    for (Index i = 0; i < dim; ++i) {
      auto& row = lists[n][i];
      for (Index j = 0; j < dim; ++j) {
        const double v = ms.s(i, j) * ms.c(i, j);
        if (v > 0.0) row.push_back({j, v});
      }
      std::stable_sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.value > b.value; });
      if (row.size() > sim.neighbor_cap) row.resize(sim.neighbor_cap);
    }
  }
  return lists;
}

// Enumerates the product of per-mode neighbor lists of `target`, calling
// fn(source_linear, raw_weight) for every combination.
template <typename Fn>
void for_each_candidate(const NeighborLists& lists, const Shape& shape, std::span<const Index> target, Fn&& fn) {
  const Index order = shape.order();
  std::vector<const std::vector<Neighbor>*> rows(order);
  for (Index n = 0; n < order; ++n) {
    rows[n] = &lists[n][target[n]];
    if (rows[n]->empty()) return;
  }
  std::vector<Index> strides(order);
  Index stride = 1;
  for (Index n = 0; n < order; ++n) {
    strides[n] = stride;
    stride *= shape.dim(n);
  }
  // Odometer over the lists with running partial products, innermost = last mode.
  std::vector<Index> pos(order, 0);
  std::vector<double> weight(order + 1, 1.0);
  std::vector<Index> offset(order + 1, 0);
  for (Index n = 0; n < order; ++n) {
    const auto& nb = (*rows[n])[0];
    weight[n + 1] = weight[n] * nb.value;
    offset[n + 1] = offset[n] + nb.j * strides[n];
  }
  while (true) {
    fn(offset[order], weight[order]);
    Index n = order;
    while (n > 0) {
      --n;
      if (++pos[n] < rows[n]->size()) break;
      pos[n] = 0;
      if (n == 0) return;
    }
    for (Index k = n; k < order; ++k) {
      const auto& nb = (*rows[k])[pos[k]];
      weight[k + 1] = weight[k] * nb.value;
      offset[k + 1] = offset[k] + nb.j * strides[k];
    }
  }
}

double median_pairwise_distance(const std::vector<std::vector<double>>& features) {
  std::vector<double> d;
  for (Index i = 0; i < features.size(); ++i)
    for (Index j = i + 1; j < features.size(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < features[i].size(); ++k) {
        const double diff = features[i][k] - features[j][k];
        s += diff * diff;
      }
      d.push_back(std::sqrt(s));
    }
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace

double Kernel::operator()(double u) const {
  switch (kind) {
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u);
    case KernelKind::euclid:
      return std::max(0.0, 1.0 - u * u);
    case KernelKind::truncated:
      return std::min(xi, std::exp(-0.5 * u * u));
  }
  return 0.0;
}

SimilarityModel SimilarityModel::unsmoothed(const Shape& shape) {
  SimilarityModel sim;
  for (Index n = 0; n < shape.order(); ++n)
    sim.per_mode.push_back({n, DenseMatrix::identity(shape.dim(n)), DenseMatrix::identity(shape.dim(n))});
  sim.neighbor_cap = 1;
  sim.normalized = false;
  sim.zero_weight = ZeroWeightPolicy::skip;
  return sim;
}

SimilarityModel SimilarityModel::uniform(const Shape& shape, bool normalized) {
  SimilarityModel sim;
  Index cap = 1;
  for (Index n = 0; n < shape.order(); ++n) {
    sim.per_mode.push_back({n, DenseMatrix(shape.dim(n), shape.dim(n), 1.0), DenseMatrix(shape.dim(n), shape.dim(n), 1.0)});
    cap = std::max(cap, shape.dim(n));
  }
  sim.neighbor_cap = cap;
  sim.normalized = normalized;
  return sim;
}

Shape SimilarityModel::shape() const {
  std::vector<Index> dims;
  for (const auto& ms : per_mode) dims.push_back(ms.s.rows());
  return Shape(std::move(dims));
}

void SimilarityModel::validate() const {
  if (per_mode.empty()) throw DimensionError("similarity: no modes");
  if (neighbor_cap == 0) throw DimensionError("similarity: neighbor_cap must be positive");
  for (Index n = 0; n < per_mode.size(); ++n) {
    const auto& ms = per_mode[n];
    const Index d = ms.s.rows();
    if (ms.s.cols() != d || ms.c.rows() != d || ms.c.cols() != d)
      throw DimensionError("similarity: mode " + std::to_string(n) + " matrices must be square and equal size");
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        if (!(ms.s(i, j) >= 0.0) || !std::isfinite(ms.s(i, j)))
          throw DomainError("similarity: kernel values must be finite and nonnegative");
        if (!(ms.c(i, j) >= 0.0 && ms.c(i, j) <= 1.0)) throw DomainError("similarity: label constants must lie in [0,1]");
      }
  }
}

ModeSimilarity mode_similarity(Index mode, const std::vector<std::vector<double>>& features, const Kernel& kernel,
                               std::span<const double> bandwidths) {
  if (features.empty()) throw DomainError("mode_similarity: empty feature set");
  const Index len = features.front().size();
  for (const auto& f : features)
    if (f.size() != len) throw DimensionError("mode_similarity: feature vectors differ in length");
  if (bandwidths.empty()) throw DomainError("mode_similarity: no bandwidths");
  for (double h : bandwidths)
    if (!(h > 0.0)) throw DomainError("mode_similarity: bandwidths must be positive");

  const Index d = features.size();
  ModeSimilarity ms{mode, DenseMatrix(d, d), DenseMatrix(d, d, 1.0)};
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      double dist2 = 0.0;
      for (Index k = 0; k < len; ++k) {
        const double diff = features[i][k] - features[j][k];
        dist2 += diff * diff;
      }
      const double dist = std::sqrt(dist2);
      double acc = 0.0;
      for (double h : bandwidths) acc += kernel(dist / h);
      ms.s(i, j) = ms.s(j, i) = acc / static_cast<double>(bandwidths.size());
    }
  return ms;
}

std::vector<double> default_bandwidths(const std::vector<std::vector<double>>& features) {
  double base = median_pairwise_distance(features);
  if (!(base > 0.0)) base = 1.0;
  std::vector<double> hs(10);
  for (int k = 0; k < 10; ++k) hs[static_cast<Index>(k)] = base * std::pow(10.0, -1.0 + 2.0 * k / 9.0);
  return hs;
}

DenseMatrix label_consistency(const std::vector<int>& labels, double same, double diff) {
  if (!(0.0 <= diff && diff <= same && same <= 1.0))
    throw DomainError("label_consistency: need 0 <= diff <= same <= 1");
  const Index d = labels.size();
  DenseMatrix c(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) c(i, j) = labels[i] == labels[j] ? same : diff;
  return c;
}

double kronecker_weight(const SimilarityModel& sim, std::span<const Index> target, std::span<const Index> source) {
  if (target.size() != sim.per_mode.size() || source.size() != sim.per_mode.size())
    throw DimensionError("kronecker_weight: index order mismatch");
  double w = 1.0;
  for (Index n = 0; n < sim.per_mode.size(); ++n) {
    const auto& ms = sim.per_mode[n];
    if (target[n] >= ms.s.rows() || source[n] >= ms.s.rows()) throw DimensionError("kronecker_weight: index out of range");
    w *= ms.s(target[n], source[n]) * ms.c(target[n], source[n]);
  }
  return w;
}

SmoothingWeights smoothing_weights(const SimilarityModel& sim, std::span<const Index> target,
                                   const ObservationSet& omega) {
  const Shape shape = sim.shape();
  if (!(shape == omega.shape())) throw DimensionError("smoothing_weights: similarity and observations differ in shape");
  if (omega.empty()) throw DomainError("smoothing_weights: observation set is empty");
  shape.linear_index(target);  // range check

  const auto lists = build_neighbors(sim);
  SmoothingWeights out;
  double total = 0.0;
  for_each_candidate(lists, shape, target, [&](Index lin, double w) {
    if (w == 0.0 || !omega.contains(lin)) return;
    out.sources.push_back({shape.multi_index(lin), lin, w});
    total += w;
  });

  if (out.sources.empty()) {
    if (sim.zero_weight == ZeroWeightPolicy::skip) return out;
    out.fallback_applied = true;
    const Index own = shape.linear_index(target);
    if (omega.contains(own)) {
      out.sources.push_back({std::vector<Index>(target.begin(), target.end()), own, 1.0});
    } else {
      const double u = 1.0 / static_cast<double>(omega.size());
      for (Index k = 0; k < omega.size(); ++k) out.sources.push_back({omega.entries()[k].index, omega.linear(k), u});
    }
    return out;
  }

  if (sim.normalized)
    for (auto& s : out.sources) s.weight /= total;
  std::stable_sort(out.sources.begin(), out.sources.end(), [](const WeightedSource& a, const WeightedSource& b) {
    return a.weight > b.weight || (a.weight == b.weight && a.linear < b.linear);
  });
  return out;
}

TargetStatistics smoothing_statistics(const SimilarityModel& sim, const ObservationSet& omega) {
  sim.validate();
  const Shape shape = sim.shape();
  if (!(shape == omega.shape())) throw DimensionError("smoothing_statistics: similarity and observations differ in shape");
  if (omega.empty()) throw DomainError("smoothing_statistics: observation set is empty");

  const auto lists = build_neighbors(sim);
  const Index total = shape.size();
  TargetStatistics st{std::vector<double>(total), std::vector<double>(total), std::vector<double>(total), 0, 0};

  double omega_m = 0.0;
  double omega_q = 0.0;
  for (const auto& e : omega.entries()) {
    omega_m += e.value;
    omega_q += e.value * e.value;
  }
  const double inv_count = 1.0 / static_cast<double>(omega.size());

  std::vector<Index> target(shape.order());
  for (Index t = 0; t < total; ++t) {
    shape.multi_index(t, target);
    double w = 0.0, m = 0.0, q = 0.0;
    for_each_candidate(lists, shape, target, [&](Index lin, double weight) {
      if (weight == 0.0) return;
      const auto pos = omega.find(lin);
      if (!pos) return;
      const double x = omega.entries()[*pos].value;
      w += weight;
      m += weight * x;
      q += weight * x * x;
    });
    if (w == 0.0) {
      if (sim.zero_weight == ZeroWeightPolicy::skip) {
        ++st.empty_targets;
        continue;
      }
      ++st.fallback_targets;
      if (const auto own = omega.find(t)) {
        const double x = omega.entries()[*own].value;
        st.w[t] = 1.0;
        st.m[t] = x;
        st.q[t] = x * x;
      } else {
        st.w[t] = 1.0;
        st.m[t] = omega_m * inv_count;
        st.q[t] = omega_q * inv_count;
      }
      continue;
    }
    if (sim.normalized) {
      m /= w;
      q /= w;
      w = 1.0;
    }
    st.w[t] = w;
    st.m[t] = m;
    st.q[t] = q;
  }
  if (st.fallback_targets > 0)
    log()->warn("smoothing: {} of {} targets had no weighted observed source; fallback weights applied",
                st.fallback_targets, total);
  return st;
}

}  // namespace dcot
