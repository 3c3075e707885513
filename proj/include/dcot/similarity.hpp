#pragma once

// Kronecker-product smoothing weights.
//
// The weight that source cell j lends to target cell i is
//   prod_n s_n(i_n, j_n) * c_n(i_n, j_n),
// where s_n is a kernel similarity between the fibers i_n and j_n of mode n
// and c_n a label-consistency constant. The full (prod I_n)^2 matrix is never
// formed: each index keeps its top `neighbor_cap` partners per mode and
// candidate sources are enumerated as the product of those lists.

#include <span>
#include <vector>

#include "dcot/observations.hpp"
#include "dcot/tensor.hpp"

namespace dcot {

enum class KernelKind {
  gaussian,   // exp(-u^2 / 2)
  euclid,     // max(0, 1 - u^2)
  truncated,  // min(xi, exp(-u^2 / 2))
};

struct Kernel {
  KernelKind kind = KernelKind::gaussian;
  double xi = 1.0;  // cap for `truncated`

  double operator()(double u) const;
};

struct ModeSimilarity {
  Index mode = 0;
  DenseMatrix s;  // kernel similarities, symmetric, >= 0
  DenseMatrix c;  // label consistency, symmetric, in [0, 1]
};

/// What to do for a target whose retained sources all carry zero weight.
enum class ZeroWeightPolicy {
  fallback,  // own entry if observed, else uniform over the observed set
  skip,      // no sources; the target contributes nothing to the loss
};

struct SimilarityModel {
  std::vector<ModeSimilarity> per_mode;
  Index neighbor_cap = 32;
  bool normalized = true;
  ZeroWeightPolicy zero_weight = ZeroWeightPolicy::fallback;

  /// Every target uses only its own entry, and only if observed: the plain
  /// likelihood over the observed set, without smoothing.
  static SimilarityModel unsmoothed(const Shape& shape);
  /// s = c = 1 everywhere.
  static SimilarityModel uniform(const Shape& shape, bool normalized = true);

  Shape shape() const;
  void validate() const;
};

/// Average of K(||y_i - y_j|| / h) over the bandwidths.
ModeSimilarity mode_similarity(Index mode, const std::vector<std::vector<double>>& features, const Kernel& kernel,
                               std::span<const double> bandwidths);

/// Ten geometric bandwidths spanning [0.1, 10] times the median pairwise
/// feature distance (1 if all features coincide).
std::vector<double> default_bandwidths(const std::vector<std::vector<double>>& features);

DenseMatrix label_consistency(const std::vector<int>& labels, double same = 0.8, double diff = 0.2);

/// Untruncated, unnormalized Kronecker weight between two cells.
double kronecker_weight(const SimilarityModel& sim, std::span<const Index> target, std::span<const Index> source);

struct WeightedSource {
  std::vector<Index> index;
  Index linear = 0;
  double weight = 0.0;
};

struct SmoothingWeights {
  std::vector<WeightedSource> sources;  // descending weight
  bool fallback_applied = false;
};

SmoothingWeights smoothing_weights(const SimilarityModel& sim, std::span<const Index> target,
                                   const ObservationSet& omega);

/// Per-target sums of the (possibly normalized) weights over observed
/// sources: w = sum weight, m = sum weight * x, q = sum weight * x^2.
/// Every family's loss depends on the observations only through these.
struct TargetStatistics {
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> q;
  Index fallback_targets = 0;
  Index empty_targets = 0;
};

TargetStatistics smoothing_statistics(const SimilarityModel& sim, const ObservationSet& omega);

}  // namespace dcot
