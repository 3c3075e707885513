#include "dcot/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "dcot/error.hpp"
#include "dcot/linalg.hpp"
#include "dcot/logging.hpp"

namespace dcot {

namespace {

using Rng = std::mt19937_64;

DenseMatrix normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd;
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = nd(rng);
  return m;
}

std::vector<int> contiguous_labels(Index n, Index clusters) {
  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i * clusters / n);
  return labels;
}

DenseMatrix unit_columns(DenseMatrix a) {
  for (Index r = 0; r < a.cols(); ++r) {
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) s += a(i, r) * a(i, r);
    const double inv = 1.0 / std::sqrt(s);
    for (Index i = 0; i < a.rows(); ++i) a(i, r) *= inv;
  }
  return a;
}

// Rows start at their cluster centroid; the basis is orthonormalized before the
// spread is added so that whitening cannot blow the spread up.
DenseMatrix clustered_factor(Index rows, Index rank, const std::vector<int>& labels, Index clusters, double spread,
                             bool nonneg, Rng& rng) {
  const DenseMatrix centroids = normal_matrix(clusters, rank, rng);
  DenseMatrix a(rows, rank);
  for (Index i = 0; i < rows; ++i)
    for (Index r = 0; r < rank; ++r) {
      const double v = centroids(static_cast<Index>(labels[i]), r);
      a(i, r) = nonneg ? std::abs(v) : v;
    }
  a = nonneg ? unit_columns(std::move(a)) : orthonormalize_columns(a);
  std::normal_distribution<double> nd(0.0, spread / std::sqrt(static_cast<double>(rows)));
  for (double& v : a.values()) v += nonneg ? std::abs(nd(rng)) : nd(rng);
  return nonneg ? unit_columns(std::move(a)) : orthonormalize_columns(a);
}

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double draw(const NoiseSpec& noise, double z, Rng& rng) {
  switch (noise.family) {
    case FamilyKind::gaussian:
      if (noise.sigma == 0.0) return z;
      return z + std::normal_distribution<double>(0.0, noise.sigma)(rng);
    case FamilyKind::bernoulli:
      return std::bernoulli_distribution(sigmoid(z))(rng) ? 1.0 : 0.0;
    case FamilyKind::poisson:
      return static_cast<double>(std::poisson_distribution<long long>(std::max(z, 0.0))(rng));
    case FamilyKind::gamma: {
      if (noise.sigma == 0.0) return z;
      const double k = 1.0 / (noise.sigma * noise.sigma);
      return std::gamma_distribution<double>(k, z / k)(rng);
    }
  }
  return z;
}

std::vector<std::vector<double>> rows_of(const DenseMatrix& u) {
  std::vector<std::vector<double>> out(u.rows(), std::vector<double>(u.cols()));
  for (Index i = 0; i < u.rows(); ++i)
    for (Index r = 0; r < u.cols(); ++r) out[i][r] = u(i, r);
  return out;
}

}  // namespace

double rmse(const DenseTensor& z_hat, const ObservationSet& reference) {
  if (reference.empty()) throw DomainError("rmse: empty reference set");
  if (!(z_hat.shape() == reference.shape()))
    throw DimensionError("rmse: estimate " + z_hat.shape().to_string() + " vs reference " +
                         reference.shape().to_string());
  double s = 0.0;
  for (Index k = 0; k < reference.size(); ++k) {
    const double d = z_hat[reference.linear(k)] - reference.entries()[k].value;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(reference.size()));
}

Split holdout_split(const ObservationSet& omega, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DomainError("holdout_split: train_fraction must lie in (0, 1)");
  const Index n = omega.size();
  if (n < 2) throw DomainError("holdout_split: need at least two observations");
  Index n_train = static_cast<Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<Index>(n_train, 1, n - 1);

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_train(n, false);
  for (Index k = 0; k < n_train; ++k) in_train[order[k]] = true;

  Split out{ObservationSet(omega.shape()), ObservationSet(omega.shape())};
  for (Index k = 0; k < n; ++k) {
    const auto& e = omega.entries()[k];
    (in_train[k] ? out.train : out.test).add(e.index, e.value);
  }
  return out;
}

std::vector<double> lambda_grid() {
  std::vector<double> grid;
  grid.reserve(61);
  // Extended precision so each value is the double nearest the exact power.
  for (int nu = 1; nu <= 61; ++nu)
    grid.push_back(static_cast<double>(std::pow(10.0L, static_cast<long double>(nu - 31) / 10.0L)));
  return grid;
}

void SynthSpec::validate() const {
  if (ranks.size() != shape.order()) throw DimensionError("synth: need one rank per mode");
  for (Index n = 0; n < ranks.size(); ++n)
    if (ranks[n] == 0 || ranks[n] > shape.dim(n)) throw DimensionError("synth: ranks must lie in [1, dim]");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) throw DomainError("synth: missing_fraction must lie in [0,1)");
  if (!(subject_core_scale >= 0.0)) throw DomainError("synth: subject_core_scale must be >= 0");
  if (!(noise.sigma >= 0.0)) throw DomainError("synth: noise sigma must be >= 0");
  for (Index n = 0; n < ranks.size(); ++n)
    if (std::min(clusters, shape.dim(n)) < ranks[n]) throw DomainError("synth: need at least as many clusters as the rank");
  if (!(cluster_spread >= 0.0)) throw DomainError("synth: cluster_spread must be >= 0");
  if (neighbor_cap == 0) throw DomainError("synth: neighbor_cap must be positive");
  partition.validate(Shape(ranks));
}

SynthData synthesize(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index order = spec.shape.order();
  const bool nonneg = spec.noise.family == FamilyKind::poisson || spec.noise.family == FamilyKind::gamma;

  SynthData out;
  DcotModel& m = out.planted;
  m.partition = spec.partition;
  for (Index n = 0; n < order; ++n) {
    const Index rows = spec.shape.dim(n);
    out.labels.push_back(contiguous_labels(rows, std::min(spec.clusters, rows)));
    m.factors.push_back(clustered_factor(rows, spec.ranks[n], out.labels.back(), std::min(spec.clusters, rows),
                                         spec.cluster_spread, nonneg, rng));
  }

  const Shape core_shape(spec.ranks);
  const double core_sd = std::sqrt(static_cast<double>(spec.shape.size()) / static_cast<double>(core_shape.size()));
  std::normal_distribution<double> nd;
  m.core_g = DenseTensor(core_shape);
  for (double& v : m.core_g.values()) v = core_sd * (nonneg ? std::abs(nd(rng)) : nd(rng));
  m.core_h = DenseTensor(core_shape);
  for (double& v : m.core_h.values()) v = nonneg ? std::abs(nd(rng)) : nd(rng);
  if (!m.partition.empty()) m.core_h = tie_heterogeneous_core(m.core_h, m.partition, TieReducer::representative);
  const double h_norm = frob_norm(m.core_h);
  const double target = spec.subject_core_scale * frob_norm(m.core_g);
  if (target == 0.0 || h_norm == 0.0)
    m.core_h = DenseTensor(core_shape);
  else
    m.core_h *= target / h_norm;

  const DenseTensor truth = reconstruct(m);
  out.truth = ObservationSet::from_dense(truth);

  DenseTensor noisy = truth;
  for (double& v : noisy.values()) v = draw(spec.noise, v, rng);
  if (spec.noise.family == FamilyKind::gamma)
    for (double& v : noisy.values()) v = std::max(v, 1e-12);

  const Index total = spec.shape.size();
  const Index missing = static_cast<Index>(std::llround(spec.missing_fraction * static_cast<double>(total)));
  std::vector<Index> cells(total);
  std::iota(cells.begin(), cells.end(), Index{0});
  std::shuffle(cells.begin(), cells.end(), rng);
  std::vector<bool> dropped(total, false);
  for (Index k = 0; k < missing; ++k) dropped[cells[k]] = true;

  out.observed = ObservationSet(spec.shape);
  for (Index t = 0; t < total; ++t)
    if (!dropped[t]) out.observed.add(spec.shape.multi_index(t), noisy[t]);

  out.sim.neighbor_cap = spec.neighbor_cap;
  const Kernel kernel{};
  for (Index n = 0; n < order; ++n) {
    const auto features = rows_of(m.factors[n]);
    ModeSimilarity ms = mode_similarity(n, features, kernel, default_bandwidths(features));
    ms.c = label_consistency(out.labels[n]);
    out.sim.per_mode.push_back(std::move(ms));
  }
  return out;
}

GridResult grid_search(const ObservationSet& train, const ObservationSet& validation, const DcotModel& init,
                       const SmoothedLoss& loss, const SolverConfig& base, const GridOptions& options) {
  if (options.grid.empty()) throw ConfigError("grid_search: empty grid");
  const Index order = init.factors.size();
  const Index blocks = 2 + order;

  auto kind_of = [&](Index b) -> PenaltyKind {
    if (b == 0) return base.penalties.core_g.kind;
    if (b == 1) return base.penalties.core_h.kind;
    return base.penalties.factor(b - 2).kind;
  };
  std::vector<Index> active;
  for (Index b = 0; b < blocks; ++b)
    if (kind_of(b) != PenaltyKind::none) active.push_back(b);
  if (active.empty()) throw ConfigError("grid_search: no block carries a penalty");

  std::vector<std::vector<double>> points;
  if (!options.per_block) {
    for (double v : options.grid) {
      std::vector<double> p(blocks, 0.0);
      for (Index b : active) p[b] = v;
      points.push_back(std::move(p));
    }
  } else {
    std::vector<Index> digit(active.size(), 0);
    for (;;) {
      std::vector<double> p(blocks, 0.0);
      for (Index a = 0; a < active.size(); ++a) p[active[a]] = options.grid[digit[a]];
      points.push_back(std::move(p));
      Index a = 0;
      while (a < digit.size() && ++digit[a] == options.grid.size()) digit[a++] = 0;
      if (a == digit.size()) break;
    }
  }

  GridResult result;
  result.rows.resize(points.size());
  auto run_point = [&](Index i) {
    GridRow& row = result.rows[i];
    row.lambdas = points[i];
    SolverConfig cfg = base;
    cfg.penalties.core_g.weight = points[i][0];
    cfg.penalties.core_h.weight = points[i][1];
    if (cfg.penalties.factors.empty()) cfg.penalties.factors.resize(order);
    for (Index n = 0; n < order; ++n) cfg.penalties.factors[n].weight = points[i][2 + n];
    try {
      const SolveResult r = solve(train, init, loss, cfg);
      const DenseTensor z_hat = reconstruct(r.state.model);
      row.validation_rmse = rmse(z_hat, validation);
      row.train_rmse = rmse(z_hat, train);
      row.iterations = r.state.iter;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(points.size())));
  if (threads == 1) {
    for (Index i = 0; i < points.size(); ++i) run_point(i);
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (Index i = next++; i < points.size(); i = next++) run_point(i);
      });
    for (auto& th : pool) th.join();
  }

  bool found = false;
  double best_sum = 0.0;
  for (Index i = 0; i < result.rows.size(); ++i) {
    const GridRow& row = result.rows[i];
    if (row.status != "ok") continue;
    const double sum = std::accumulate(row.lambdas.begin(), row.lambdas.end(), 0.0);
    const double best_rmse = found ? result.rows[result.best].validation_rmse : 0.0;
    if (!found || row.validation_rmse < best_rmse || (row.validation_rmse == best_rmse && sum > best_sum)) {
      result.best = i;
      best_sum = sum;
      found = true;
    }
  }
  if (!found) throw SolverError("grid_search: every grid point failed");
  log()->info("grid search: best validation RMSE {:.6g} at point {}", result.best_row().validation_rmse, result.best);
  return result;
}

}  // namespace dcot
