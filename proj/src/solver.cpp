#include "dcot/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "dcot/error.hpp"
#include "dcot/lbfgs.hpp"
#include "dcot/linalg.hpp"
#include "dcot/logging.hpp"

namespace dcot {

namespace {

const Penalty kNoPenalty{};

DenseTensor combined_core(const DcotModel& m) { return m.core_g + m.core_h; }

std::vector<DenseMatrix> grams(const std::vector<DenseMatrix>& factors) {
  std::vector<DenseMatrix> out;
  out.reserve(factors.size());
  for (const auto& u : factors) out.push_back(matmul_tn(u, u));
  return out;
}

double largest_eigenvalue(const DenseMatrix& a) {
  const PowerIterationResult r = power_iteration(a);
  if (r.converged) return r.value;
  log()->debug("power iteration did not converge, using the Frobenius bound");
  return frob_norm(a);
}

double clamp_modulus(double v, const SolverConfig& c) { return std::max(v, c.moduli_floor); }

void validate_config(const SolverConfig& c, const DcotModel& model) {
  const Index n = model.factors.size();
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) throw ConfigError("gamma must be finite and >= 0");
  if (!c.enforce_gamma_bound && !(c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (c.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (c.moduli_period < 1) throw ConfigError("moduli_period must be >= 1");
  if (!(c.lipschitz_safety >= 1.0)) throw ConfigError("lipschitz_safety must be >= 1");
  if (!(c.moduli_floor > 0.0)) throw ConfigError("moduli_floor must be positive");
  if (!(c.divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
  if (!c.rho_factor.empty() && c.rho_factor.size() != n) throw ConfigError("rho_factor needs one value per mode");
  for (double r : c.rho_factor)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rho values must be finite and >= 0");
  if (!(c.rho_g >= 0.0) || !(c.rho_h >= 0.0)) throw ConfigError("rho values must be >= 0");
  if (!c.penalties.factors.empty() && c.penalties.factors.size() != n)
    throw ConfigError("factor penalties need one entry per mode");
  if (c.z_solver.memory < 1 || c.z_solver.max_inner < 1 || !(c.z_solver.grad_tol > 0.0))
    throw ConfigError("invalid z_solver settings");
  c.penalties.core_g.validate(model.core_g.size());
  c.penalties.core_h.validate(model.core_h.size());
  for (Index k = 0; k < n; ++k) c.penalties.factor(k).validate(model.factors[k].size());
}

}  // namespace

const Penalty& BlockPenalties::factor(Index n) const {
  if (factors.empty()) return kNoPenalty;
  return factors.at(n);
}

double TraceRow::total_step() const {
  double s = z_step * z_step + g_step * g_step + h_step * h_step;
  for (double f : factor_steps) s += f * f;
  return std::sqrt(s);
}

DenseTensor residual_tensor(const SolverState& state, double gamma) {
  DenseTensor m = reconstruct(state.model);
  m -= state.z;
  m *= gamma;
  m -= state.y;
  return m;
}

DenseMatrix factor_gradient(const SolverState& state, Index n, double gamma) {
  const auto& factors = state.model.factors;
  DenseTensor w = residual_tensor(state, gamma);
  for (Index t = 0; t < factors.size(); ++t)
    if (t != n) w = n_mode_product_transposed(w, factors[t], t);
  return matmul_nt(matricize(w, n), matricize(combined_core(state.model), n));
}

DenseTensor core_gradient(const SolverState& state, double gamma) {
  return multilinear_product_transposed(residual_tensor(state, gamma), state.model.factors);
}

DenseMatrix update_factor(const SolverState& state, Index n, const SolverConfig& config, const Moduli& moduli) {
  const double rho = moduli.rho_factor.at(n);
  DenseMatrix u = state.model.factors[n];
  u -= (1.0 / rho) * factor_gradient(state, n, moduli.gamma);
  return prox_apply(config.penalties.factor(n), u, rho);
}

CoreUpdate update_cores(const SolverState& state, const SolverConfig& config, const Moduli& moduli) {
  CoreUpdate out;
  DenseTensor g = state.model.core_g;
  g.axpy(-1.0 / moduli.rho_g, core_gradient(state, moduli.gamma));
  out.g = prox_apply(config.penalties.core_g, g, moduli.rho_g);
  if (!config.update_h) {
    out.h = state.model.core_h;
    return out;
  }
  SolverState mid = state;
  mid.model.core_g = out.g;
  DenseTensor h = state.model.core_h;
  h.axpy(-1.0 / moduli.rho_h, core_gradient(mid, moduli.gamma));
  h = prox_apply(config.penalties.core_h, h, moduli.rho_h);
  out.h = state.model.partition.empty() ? std::move(h)
                                        : tie_heterogeneous_core(h, state.model.partition, config.tie_reducer);
  return out;
}

ZUpdate update_z(const SolverState& state, const SmoothedLoss& loss, const SolverConfig& config, double gamma) {
  DenseTensor c = reconstruct(state.model);
  c.axpy(-1.0 / gamma, state.y);
  const double inv_p = 1.0 / loss.cells();
  const auto& st = loss.stats();

  ZSolverKind kind = config.z_solver.kind;
  if (kind == ZSolverKind::automatic)
    kind = loss.family().kind == FamilyKind::gaussian ? ZSolverKind::closed_form_gaussian : ZSolverKind::quasi_newton;

  ZUpdate out;
  if (kind == ZSolverKind::closed_form_gaussian) {
    if (loss.family().kind != FamilyKind::gaussian) throw ConfigError("closed-form Z update needs the gaussian family");
    out.z = DenseTensor(c.shape());
    for (Index t = 0; t < c.size(); ++t)
      out.z[t] = (2.0 * st.m[t] * inv_p + gamma * c[t]) / (2.0 * st.w[t] * inv_p + gamma);
    return out;
  }

  const double lb = loss.lower_bound();
  auto objective = [&](std::span<const double> z, std::span<double> g) {
    double f = 0.0;
    for (Index t = 0; t < z.size(); ++t) {
      const double d = z[t] - c[t];
      f += loss.target_value(t, z[t]) * inv_p + 0.5 * gamma * d * d;
      g[t] = loss.target_derivative(t, z[t]) * inv_p + gamma * d;
    }
    return f;
  };
  double c_inf = 0.0;
  for (double v : c.values()) c_inf = std::max(c_inf, std::abs(v));

  LbfgsOptions opts;
  opts.memory = config.z_solver.memory;
  opts.max_iters = config.z_solver.max_inner;
  opts.grad_tol = config.z_solver.grad_tol * gamma * std::max(1.0, c_inf);
  opts.lower_bound = lb;

  std::vector<double> z = state.z.values();
  const LbfgsResult r = lbfgs_minimize(objective, z, opts);
  out.z = DenseTensor(c.shape(), std::move(z));
  out.inner_iterations = r.iterations;
  out.grad_norm = r.grad_norm;
  out.converged = r.converged;
  return out;
}

DenseTensor update_dual(const SolverState& state, double gamma) {
  DenseTensor r = reconstruct(state.model);
  r -= state.z;
  DenseTensor y = state.y;
  y.axpy(-gamma, r);
  return y;
}

double lagrangian_value(const SolverState& state, const SmoothedLoss& loss, const BlockPenalties& penalties,
                        double gamma) {
  DenseTensor r = reconstruct(state.model);
  r -= state.z;
  double value = loss.value(state.z);
  value += penalty_value(penalties.core_g, state.model.core_g);
  value += penalty_value(penalties.core_h, state.model.core_h);
  for (Index n = 0; n < state.model.factors.size(); ++n)
    value += penalty_value(penalties.factor(n), state.model.factors[n]);
  const double rr = frob_norm(r);
  return value - frob_inner(state.y, r) + 0.5 * gamma * rr * rr;
}

double loss_lipschitz_for(const SmoothedLoss& loss, const SolverConfig& config) {
  const FamilyKind kind = loss.family().kind;
  if (kind == FamilyKind::gaussian || kind == FamilyKind::bernoulli) return loss.lipschitz();
  if (config.lipschitz_z_min) return loss.lipschitz(config.lipschitz_z_min);
  const auto& st = loss.stats();
  double smallest = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < st.w.size(); ++t)
    if (st.w[t] > 0.0 && st.m[t] > 0.0) smallest = std::min(smallest, st.m[t] / st.w[t]);
  const double eps = loss.family().epsilon;
  const double z_min = std::isfinite(smallest) ? std::max(0.5 * smallest, eps) : eps;
  return loss.lipschitz(z_min);
}

double factor_modulus(const SolverState& state, Index n, const SolverConfig& config, double gamma) {
  const auto& factors = state.model.factors;
  const DenseTensor s = combined_core(state.model);
  DenseTensor t = s;
  for (Index k = 0; k < factors.size(); ++k)
    if (k != n) t = n_mode_product(t, matmul_tn(factors[k], factors[k]), k);
  const DenseMatrix bbt = matmul_nt(matricize(t, n), matricize(s, n));
  return clamp_modulus(config.lipschitz_safety * gamma * largest_eigenvalue(bbt), config);
}

double core_modulus(const SolverState& state, const SolverConfig& config, double gamma) {
  double prod = 1.0;
  for (const DenseMatrix& g : grams(state.model.factors)) prod *= largest_eigenvalue(g);
  return clamp_modulus(config.lipschitz_safety * gamma * prod, config);
}

Moduli estimate_moduli(const SolverState& state, const SmoothedLoss& loss, const SolverConfig& config) {
  Moduli out;
  out.gamma = config.gamma;
  if (config.enforce_gamma_bound) out.gamma = std::max(out.gamma, 2.0 * 1.05 * loss_lipschitz_for(loss, config));
  if (!(out.gamma > 0.0)) out.gamma = config.moduli_floor;

  const Index order = state.model.factors.size();
  out.rho_factor.resize(order);
  for (Index n = 0; n < order; ++n)
    out.rho_factor[n] = !config.rho_factor.empty() && config.rho_factor[n] > 0.0
                            ? config.rho_factor[n]
                            : factor_modulus(state, n, config, out.gamma);
  const double core = core_modulus(state, config, out.gamma);
  out.rho_g = config.rho_g > 0.0 ? config.rho_g : core;
  out.rho_h = config.rho_h > 0.0 ? config.rho_h : core;
  return out;
}

DenseTensor initial_z(const ObservationSet& omega, const LossFamily& family) {
  const double fill = family.kind == FamilyKind::bernoulli || omega.empty() ? 0.0 : omega.mean();
  DenseTensor z = omega.to_dense(fill);
  if (family.kind == FamilyKind::poisson || family.kind == FamilyKind::gamma)
    for (double& v : z.values()) v = std::max(v, family.epsilon);
  return z;
}

SolveResult solve(const ObservationSet& omega, const DcotModel& init, const LossFamily& family,
                  const SimilarityModel& sim, const SolverConfig& config) {
  validate_observations(family, omega);
  return solve(omega, init, SmoothedLoss(family, sim, omega), config);
}

SolveResult solve(const ObservationSet& omega, const DcotModel& init, const SmoothedLoss& loss,
                  const SolverConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  init.validate();
  if (!(init.data_shape() == omega.shape()) || !(loss.shape() == omega.shape()))
    throw DimensionError("observations " + omega.shape().to_string() + " do not match the model " +
                         init.data_shape().to_string());
  if (!init.partition.empty()) init.partition.validate(init.core_shape());
  validate_config(config, init);

  SolveResult result;
  SolverState& state = result.state;
  state.model = init;
  if (!state.model.partition.empty())
    state.model.core_h = tie_heterogeneous_core(state.model.core_h, state.model.partition, config.tie_reducer);
  state.z = initial_z(omega, loss.family());
  if (config.initial_dual) {
    if (!(config.initial_dual->shape() == omega.shape())) throw DimensionError("initial dual has the wrong shape");
    state.y = *config.initial_dual;
  } else {
    state.y = loss.gradient(state.z);
    state.y *= -1.0;
  }

  const double tol_primal = config.tol_primal.value_or(1e-6 * omega.frob_norm());
  Moduli& moduli = result.moduli;
  moduli = estimate_moduli(state, loss, config);
  log()->info("solve: gamma={:.6g} rho_g={:.6g} rho_h={:.6g}", moduli.gamma, moduli.rho_g, moduli.rho_h);

  auto make_row = [&](int iter) {
    TraceRow row;
    row.iter = iter;
    row.loss = loss.value(state.z);
    row.lagrangian = lagrangian_value(state, loss, config.penalties, moduli.gamma);
    row.primal_residual = frob_distance(reconstruct(state.model), state.z);
    row.factor_steps.assign(state.model.factors.size(), 0.0);
    return row;
  };

  TraceRow first = make_row(0);
  first.wall_time = std::chrono::duration<double>(clock::now() - start).count();
  const double l0 = first.lagrangian;
  if (!std::isfinite(l0)) throw SolverError("solve: initial Lagrangian is not finite");
  const double ceiling = l0 + (config.divergence_factor - 1.0) * std::max(std::abs(l0), 1e-300);
  state.trace.rows.push_back(std::move(first));
  result.stop_reason = "max_iters";

  const bool per_block = config.moduli == ModuliPolicy::per_block;
  for (int k = 1; k <= config.max_iters; ++k) {
    if (config.moduli == ModuliPolicy::periodic && k > 1 && (k - 1) % config.moduli_period == 0) {
      const double gamma = moduli.gamma;
      moduli = estimate_moduli(state, loss, config);
      moduli.gamma = gamma;
    }

    std::vector<double> factor_steps(state.model.factors.size());
    for (Index n = 0; n < state.model.factors.size(); ++n) {
      if (per_block && !(n < config.rho_factor.size() && config.rho_factor[n] > 0.0))
        moduli.rho_factor[n] = factor_modulus(state, n, config, moduli.gamma);
      DenseMatrix u = update_factor(state, n, config, moduli);
      factor_steps[n] = frob_distance(u, state.model.factors[n]);
      state.model.factors[n] = std::move(u);
    }

    if (per_block) {
      const double core = core_modulus(state, config, moduli.gamma);
      if (!(config.rho_g > 0.0)) moduli.rho_g = core;
      if (!(config.rho_h > 0.0)) moduli.rho_h = core;
    }
    CoreUpdate cores = update_cores(state, config, moduli);
    const double g_step = frob_distance(cores.g, state.model.core_g);
    const double h_step = frob_distance(cores.h, state.model.core_h);
    state.model.core_g = std::move(cores.g);
    state.model.core_h = std::move(cores.h);

    ZUpdate zu = update_z(state, loss, config, moduli.gamma);
    const double z_step = frob_distance(zu.z, state.z);
    state.z = std::move(zu.z);
    if (!zu.converged)
      log()->warn("iteration {}: Z subproblem stopped after {} steps with gradient norm {:.3g}", k,
                  zu.inner_iterations, zu.grad_norm);

    DenseTensor y = update_dual(state, moduli.gamma);
    const double dual_step = frob_distance(y, state.y);
    state.y = std::move(y);
    state.iter = k;

    TraceRow row = make_row(k);
    row.dual_step = dual_step;
    row.z_step = z_step;
    row.factor_steps = std::move(factor_steps);
    row.g_step = g_step;
    row.h_step = h_step;
    row.z_inner_iters = zu.inner_iterations;
    row.z_grad_norm = zu.grad_norm;
    row.wall_time = std::chrono::duration<double>(clock::now() - start).count();
    const double lag = row.lagrangian;
    const bool done = row.primal_residual <= tol_primal && row.total_step() <= config.tol_step;
    state.trace.rows.push_back(std::move(row));

    if (!std::isfinite(lag) || lag > ceiling)
      throw SolverError(fmt::format("solve diverged at iteration {}: Lagrangian {:.6g} (initial {:.6g})", k, lag, l0));
    if (done) {
      result.stop_reason = "converged";
      break;
    }
  }
  return result;
}

}  // namespace dcot
