#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcot/loss.hpp"
#include "dcot/model.hpp"
#include "dcot/observations.hpp"
#include "dcot/similarity.hpp"
#include "dcot/solver.hpp"

namespace dcot {

/// sqrt(mean((z_hat - x)^2)) over the reference entries.
double rmse(const DenseTensor& z_hat, const ObservationSet& reference);

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

struct Split {
  ObservationSet train;
  ObservationSet test;
};

/// Seeded random split; entries keep their original relative order.
Split holdout_split(const ObservationSet& omega, const SplitSpec& spec);

/// The 61 values 10^((nu - 31) / 10), nu = 1..61.
std::vector<double> lambda_grid();

struct NoiseSpec {
  FamilyKind family = FamilyKind::gaussian;
  /// gaussian: standard deviation. gamma: coefficient of variation.
  double sigma = 0.0;
};

struct SynthSpec {
  Shape shape;
  std::vector<Index> ranks;
  SubjectPartition partition;
  double subject_core_scale = 1.0;  // ||H|| / ||G||
  NoiseSpec noise;
  double missing_fraction = 0.0;
  std::uint64_t seed = 0;

  /// Factor rows are drawn around `clusters` centroids per mode (at least
  /// the rank); the cluster index is the row's label. The spread is relative
  /// to the typical row norm.
  Index clusters = 4;
  double cluster_spread = 0.1;
  Index neighbor_cap = 3;

  void validate() const;
};

struct SynthData {
  ObservationSet observed;
  ObservationSet truth;  // every cell of Z*
  DcotModel planted;
  SimilarityModel sim;
  std::vector<std::vector<int>> labels;  // per mode
};

/// Planted model: orthonormal factors (nonnegative, unit-norm columns for
/// poisson/gamma), G with entries N(0, P / prod R) so Z* has unit RMS, H
/// drawn, tied by representative and rescaled to subject_core_scale * ||G||.
SynthData synthesize(const SynthSpec& spec);

struct GridOptions {
  std::vector<double> grid = lambda_grid();
  /// Independent value per penalized block (Cartesian product) instead of
  /// one shared value.
  bool per_block = false;
  unsigned threads = 1;
};

struct GridRow {
  std::vector<double> lambdas;  // G, H, U^(1..N); zero for unpenalized blocks
  double validation_rmse = 0.0;
  double train_rmse = 0.0;
  int iterations = 0;
  std::string status;  // "ok" or the error message
};

struct GridResult {
  Index best = 0;
  std::vector<GridRow> rows;

  const GridRow& best_row() const { return rows.at(best); }
};

/// Solves at every grid point (weights applied to the blocks whose penalty
/// kind is not none) and picks the smallest validation RMSE, ties going to
/// the larger total weight.
GridResult grid_search(const ObservationSet& train, const ObservationSet& validation, const DcotModel& init,
                       const SmoothedLoss& loss, const SolverConfig& base, const GridOptions& options);

}  // namespace dcot
