#pragma once

// Smoothed negative log-likelihoods. For a target cell t with weight sums
// (w, m, q) from smoothing_statistics, the per-target losses are
//   gaussian   w z^2 - 2 m z + q           (= sum_j weight_j (z - x_j)^2)
//   bernoulli  w log(1 + e^z) - m z         (log-odds link)
//   poisson    w z - m log z                (identity link, z >= 0)
//   gamma      w log(z + eps) + m / (z + eps)
// and the objective is their sum divided by the number of cells P, so
// unobserved cells are fitted through their weighted neighbours.

#include <optional>
#include <string>

#include "dcot/observations.hpp"
#include "dcot/similarity.hpp"
#include "dcot/tensor.hpp"

namespace dcot {

enum class FamilyKind { gaussian, bernoulli, poisson, gamma };

struct LossFamily {
  FamilyKind kind = FamilyKind::gaussian;
  double epsilon = 1e-6;  // gamma shift and poisson/gamma domain floor
};

std::string to_string(FamilyKind kind);
FamilyKind family_from_string(const std::string& name);

/// Throws DomainError if an observed value is outside the family's support.
void validate_observations(const LossFamily& family, const ObservationSet& omega);

class SmoothedLoss {
 public:
  SmoothedLoss(LossFamily family, const SimilarityModel& sim, const ObservationSet& omega);
  SmoothedLoss(LossFamily family, Shape shape, TargetStatistics stats);

  double value(const DenseTensor& z) const;
  DenseTensor gradient(const DenseTensor& z) const;

  /// Upper bound on the Lipschitz constant of the gradient. Poisson and gamma
  /// need a positive lower bound on z.
  double lipschitz(std::optional<double> z_min = std::nullopt) const;

  /// Per-target loss and its derivative in z, before the 1/P scaling.
  double target_value(Index t, double z) const;
  double target_derivative(Index t, double z) const;

  /// Smallest admissible z (minus infinity for gaussian/bernoulli).
  double lower_bound() const;
  void check_domain(const DenseTensor& z) const;

  const LossFamily& family() const noexcept { return family_; }
  const Shape& shape() const noexcept { return shape_; }
  const TargetStatistics& stats() const noexcept { return stats_; }
  double cells() const noexcept { return static_cast<double>(shape_.size()); }

 private:
  LossFamily family_;
  Shape shape_;
  TargetStatistics stats_;
};

double loss_value(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                  const DenseTensor& z);
DenseTensor loss_gradient(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                          const DenseTensor& z);
double loss_lipschitz(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                      std::optional<double> z_min = std::nullopt);

}  // namespace dcot
