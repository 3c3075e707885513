#include "dcot/prox.hpp"

#include <cmath>
#include <limits>
#include <span>

#include "dcot/error.hpp"
#include "dcot/linalg.hpp"

namespace dcot {

namespace {

double soft(double v, double tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

// Value of the elementwise penalties on flat storage.
double flat_value(const Penalty& p, std::span<const double> x) {
  switch (p.kind) {
    case PenaltyKind::none:
      return 0.0;
    case PenaltyKind::l1: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return p.weight * s;
    }
    case PenaltyKind::frob_sq: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return p.weight * s;
    }
    case PenaltyKind::nonneg:
      if (p.weight == 0.0) return 0.0;
      for (double v : x)
        if (v < 0.0) return std::numeric_limits<double>::infinity();
      return 0.0;
    case PenaltyKind::sparse_group_lasso: {
      double l1 = 0.0;
      for (double v : x) l1 += std::abs(v);
      double groups = 0.0;
      for (const auto& g : p.groups) {
        double s = 0.0;
        for (Index k : g) s += x[k] * x[k];
        groups += std::sqrt(s);
      }
      return p.weight * (p.mix * l1 + (1.0 - p.mix) * groups);
    }
    case PenaltyKind::nuclear:
      break;
  }
  throw DimensionError("nuclear norm is defined for matrices only");
}

void flat_prox(const Penalty& p, std::span<double> x, double t) {
  const double tau = p.weight / t;
  switch (p.kind) {
    case PenaltyKind::none:
      return;
    case PenaltyKind::l1:
      for (double& v : x) v = soft(v, tau);
      return;
    case PenaltyKind::frob_sq: {
      const double scale = t / (t + 2.0 * p.weight);
      for (double& v : x) v *= scale;
      return;
    }
    case PenaltyKind::nonneg:
      for (double& v : x) v = std::max(v, 0.0);
      return;
    case PenaltyKind::sparse_group_lasso: {
      const double tau1 = p.mix * tau;
      const double tau2 = (1.0 - p.mix) * tau;
      for (double& v : x) v = soft(v, tau1);
      for (const auto& g : p.groups) {
        double s = 0.0;
        for (Index k : g) s += x[k] * x[k];
        const double norm = std::sqrt(s);
        const double scale = norm > tau2 ? 1.0 - tau2 / norm : 0.0;
        for (Index k : g) x[k] *= scale;
      }
      return;
    }
    case PenaltyKind::nuclear:
      break;
  }
  throw DimensionError("nuclear norm is defined for matrices only");
}

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("prox: t must be positive and finite");
}

DenseMatrix as_matrix(const DenseTensor& t) {
  if (t.order() != 2) throw DimensionError("nuclear norm is defined for matrices only");
  return DenseMatrix(t.shape().dim(0), t.shape().dim(1), t.values());
}

}  // namespace

void Penalty::validate(Index size) const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw DomainError("penalty weight must be finite and >= 0");
  if (kind != PenaltyKind::sparse_group_lasso) return;
  if (!(mix >= 0.0 && mix <= 1.0)) throw DomainError("sparse group lasso mix must lie in [0,1]");
  std::vector<bool> used(size, false);
  for (const auto& g : groups)
    for (Index k : g) {
      if (k >= size) throw DimensionError("sparse group lasso: group offset out of range");
      if (used[k]) throw DimensionError("sparse group lasso: groups overlap");
      used[k] = true;
    }
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::none: return "none";
    case PenaltyKind::l1: return "l1";
    case PenaltyKind::frob_sq: return "frob_sq";
    case PenaltyKind::nuclear: return "nuclear";
    case PenaltyKind::nonneg: return "nonneg";
    case PenaltyKind::sparse_group_lasso: return "sparse_group_lasso";
  }
  return "unknown";
}

PenaltyKind penalty_from_string(const std::string& name) {
  if (name == "none") return PenaltyKind::none;
  if (name == "l1") return PenaltyKind::l1;
  if (name == "frob_sq") return PenaltyKind::frob_sq;
  if (name == "nuclear") return PenaltyKind::nuclear;
  if (name == "nonneg") return PenaltyKind::nonneg;
  if (name == "sparse_group_lasso") return PenaltyKind::sparse_group_lasso;
  throw ConfigError("unknown penalty kind '" + name + "'");
}

double penalty_value(const Penalty& p, const DenseMatrix& point) {
  p.validate(point.size());
  if (p.kind != PenaltyKind::nuclear) return flat_value(p, point.data());
  double s = 0.0;
  for (double sigma : thin_svd(point).sigma) s += sigma;
  return p.weight * s;
}

double penalty_value(const Penalty& p, const DenseTensor& point) {
  p.validate(point.size());
  if (p.kind == PenaltyKind::nuclear) return penalty_value(p, as_matrix(point));
  return flat_value(p, point.data());
}

DenseMatrix prox_apply(const Penalty& p, const DenseMatrix& point, double t) {
  check_t(t);
  p.validate(point.size());
  if (p.kind == PenaltyKind::none || p.weight == 0.0) return point;
  if (p.kind != PenaltyKind::nuclear) {
    DenseMatrix out = point;
    flat_prox(p, out.data(), t);
    return out;
  }
  // Singular value soft-thresholding.
  const double tau = p.weight / t;
  const Svd svd = thin_svd(point);
  DenseMatrix out(point.rows(), point.cols());
  for (Index k = 0; k < svd.sigma.size(); ++k) {
    const double s = std::max(svd.sigma[k] - tau, 0.0);
    if (s == 0.0) continue;
    for (Index j = 0; j < point.cols(); ++j) {
      const double vj = s * svd.v(j, k);
      for (Index i = 0; i < point.rows(); ++i) out(i, j) += svd.u(i, k) * vj;
    }
  }
  return out;
}

DenseTensor prox_apply(const Penalty& p, const DenseTensor& point, double t) {
  check_t(t);
  p.validate(point.size());
  if (p.kind == PenaltyKind::none || p.weight == 0.0) return point;
  if (p.kind == PenaltyKind::nuclear) {
    const DenseMatrix m = prox_apply(p, as_matrix(point), t);
    return DenseTensor(point.shape(), m.values());
  }
  DenseTensor out = point;
  flat_prox(p, out.data(), t);
  return out;
}

}  // namespace dcot
