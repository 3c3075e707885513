#include "dcot/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcot/error.hpp"

namespace dcot {

namespace {

constexpr double kLogFloor = 1e-12;

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::bernoulli: return "bernoulli";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gamma: return "gamma";
  }
  return "unknown";
}

FamilyKind family_from_string(const std::string& name) {
  if (name == "gaussian") return FamilyKind::gaussian;
  if (name == "bernoulli") return FamilyKind::bernoulli;
  if (name == "poisson") return FamilyKind::poisson;
  if (name == "gamma") return FamilyKind::gamma;
  throw ConfigError("unknown loss family '" + name + "'");
}

void validate_observations(const LossFamily& family, const ObservationSet& omega) {
  for (const auto& e : omega.entries()) {
    const double x = e.value;
    switch (family.kind) {
      case FamilyKind::gaussian:
        break;
      case FamilyKind::bernoulli:
        if (x != 0.0 && x != 1.0) throw DomainError("bernoulli observations must be 0 or 1");
        break;
      case FamilyKind::poisson:
        if (x < 0.0 || x != std::floor(x)) throw DomainError("poisson observations must be nonnegative integers");
        break;
      case FamilyKind::gamma:
        if (!(x > 0.0)) throw DomainError("gamma observations must be strictly positive");
        break;
    }
  }
}

SmoothedLoss::SmoothedLoss(LossFamily family, const SimilarityModel& sim, const ObservationSet& omega)
    : family_(family), shape_(omega.shape()) {
  if (family_.kind == FamilyKind::gamma && !(family_.epsilon > 0.0))
    throw DomainError("gamma family needs a positive epsilon");
  validate_observations(family_, omega);
  stats_ = smoothing_statistics(sim, omega);
}

SmoothedLoss::SmoothedLoss(LossFamily family, Shape shape, TargetStatistics stats)
    : family_(family), shape_(std::move(shape)), stats_(std::move(stats)) {
  if (stats_.w.size() != shape_.size() || stats_.m.size() != shape_.size() || stats_.q.size() != shape_.size())
    throw DimensionError("SmoothedLoss: statistics do not match shape");
}

double SmoothedLoss::lower_bound() const {
  switch (family_.kind) {
    case FamilyKind::poisson:
    case FamilyKind::gamma:
      return family_.epsilon;
    default:
      return -std::numeric_limits<double>::infinity();
  }
}

void SmoothedLoss::check_domain(const DenseTensor& z) const {
  if (!(z.shape() == shape_)) throw DimensionError("loss: z shape " + z.shape().to_string() + " != " + shape_.to_string());
  if (family_.kind == FamilyKind::poisson || family_.kind == FamilyKind::gamma)
    for (double v : z.data())
      if (v < 0.0) throw DomainError("loss: " + to_string(family_.kind) + " requires z >= 0");
}

double SmoothedLoss::target_value(Index t, double z) const {
  const double w = stats_.w[t], m = stats_.m[t], q = stats_.q[t];
  if (w == 0.0 && m == 0.0) return 0.0;
  switch (family_.kind) {
    case FamilyKind::gaussian:
      return w * z * z - 2.0 * m * z + q;
    case FamilyKind::bernoulli:
      return w * softplus(z) - m * z;
    case FamilyKind::poisson:
      return w * z - m * std::log(std::max(z, kLogFloor));
    case FamilyKind::gamma: {
      const double s = z + family_.epsilon;
      return w * std::log(s) + m / s;
    }
  }
  return 0.0;
}

double SmoothedLoss::target_derivative(Index t, double z) const {
  const double w = stats_.w[t], m = stats_.m[t];
  switch (family_.kind) {
    case FamilyKind::gaussian:
      return 2.0 * (w * z - m);
    case FamilyKind::bernoulli:
      return sigmoid(z) * w - m;
    case FamilyKind::poisson:
      return w - m / std::max(z, kLogFloor);
    case FamilyKind::gamma: {
      const double s = z + family_.epsilon;
      return w / s - m / (s * s);
    }
  }
  return 0.0;
}

double SmoothedLoss::value(const DenseTensor& z) const {
  check_domain(z);
  double total = 0.0;
  for (Index t = 0; t < z.size(); ++t) total += target_value(t, z[t]);
  return total / cells();
}

DenseTensor SmoothedLoss::gradient(const DenseTensor& z) const {
  check_domain(z);
  DenseTensor g(shape_);
  const double inv = 1.0 / cells();
  for (Index t = 0; t < z.size(); ++t) g[t] = target_derivative(t, z[t]) * inv;
  return g;
}

double SmoothedLoss::lipschitz(std::optional<double> z_min) const {
  const double max_w = stats_.w.empty() ? 0.0 : *std::max_element(stats_.w.begin(), stats_.w.end());
  const double max_m = stats_.m.empty() ? 0.0 : *std::max_element(stats_.m.begin(), stats_.m.end());
  const double inv = 1.0 / cells();
  switch (family_.kind) {
    case FamilyKind::gaussian:
      return 2.0 * max_w * inv;
    case FamilyKind::bernoulli:
      return 0.25 * max_w * inv;
    case FamilyKind::poisson:
      if (!z_min || !(*z_min > 0.0)) throw DomainError("loss_lipschitz: poisson needs a positive z_min");
      return max_m / (*z_min * *z_min) * inv;
    case FamilyKind::gamma: {
      if (!z_min || !(*z_min >= 0.0)) throw DomainError("loss_lipschitz: gamma needs a nonnegative z_min");
      const double s = *z_min + family_.epsilon;
      double bound = 0.0;
      for (Index t = 0; t < stats_.w.size(); ++t)
        bound = std::max(bound, stats_.w[t] / (s * s) + 2.0 * stats_.m[t] / (s * s * s));
      return bound * inv;
    }
  }
  return 0.0;
}

double loss_value(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                  const DenseTensor& z) {
  return SmoothedLoss(family, sim, omega).value(z);
}

DenseTensor loss_gradient(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                          const DenseTensor& z) {
  return SmoothedLoss(family, sim, omega).gradient(z);
}

double loss_lipschitz(const LossFamily& family, const SimilarityModel& sim, const ObservationSet& omega,
                      std::optional<double> z_min) {
  return SmoothedLoss(family, sim, omega).lipschitz(z_min);
}

}  // namespace dcot
