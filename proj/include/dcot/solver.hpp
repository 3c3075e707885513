#pragma once

// Linearized multi-block ADMM for
//   min F(Z) + l1 J1(G) + l2 J2(H) + sum_n l3n J3n(U^(n))
//   s.t. (G + H) x_1 U^(1) ... x_N U^(N) = Z.
//
// Augmented Lagrangian (sign convention used everywhere below):
//   L = F(Z) + penalties - <Y, R - Z> + (gamma/2) ||R - Z||^2,   R = reconstruct
//     = F(Z) + penalties + Lbar - ||Y||^2 / (2 gamma),
//   Lbar = (gamma/2) ||R - Z - Y/gamma||^2.
// One iteration is the Gauss-Seidel sweep
//   U^(1..N) -> G -> H (tied) -> Z -> Y,
// where each of U, G, H takes a prox step on the linearization of Lbar with
// modulus rho, Z minimizes F + Lbar exactly, and Y <- Y - gamma (R - Z).
// With this convention the Z optimality condition gives Y_{k+1} = -grad F(Z_{k+1}).

#include <optional>
#include <string>
#include <vector>

#include "dcot/loss.hpp"
#include "dcot/model.hpp"
#include "dcot/observations.hpp"
#include "dcot/prox.hpp"
#include "dcot/similarity.hpp"

namespace dcot {

enum class ZSolverKind {
  automatic,             // closed form for gaussian, quasi-Newton otherwise
  closed_form_gaussian,
  quasi_newton,
};

struct ZSolverConfig {
  ZSolverKind kind = ZSolverKind::automatic;
  int memory = 10;
  int max_inner = 50;
  /// Relative: the inner solve stops at ||grad||_inf <= grad_tol * gamma * max(1, ||target||_inf).
  double grad_tol = 1e-8;
};

enum class ModuliPolicy {
  per_block,  // each block's modulus from the current state right before its update
  periodic,   // every `moduli_period` iterations
  fixed,      // once before the first iteration
};

struct BlockPenalties {
  Penalty core_g;
  Penalty core_h;
  std::vector<Penalty> factors;  // empty, or one per mode

  const Penalty& factor(Index n) const;
};

struct SolverConfig {
  double gamma = 0.0;
  /// Raise gamma to at least 2.1 * L_F before solving.
  bool enforce_gamma_bound = true;
  /// Lower bound on z used when bounding L_F for poisson/gamma; defaults to
  /// half the smallest positive weighted mean (at least epsilon).
  std::optional<double> lipschitz_z_min;

  /// Linearization moduli. Zero/empty means "estimate".
  std::vector<double> rho_factor;
  double rho_g = 0.0;
  double rho_h = 0.0;
  double lipschitz_safety = 1.1;
  double moduli_floor = 1e-8;
  ModuliPolicy moduli = ModuliPolicy::per_block;
  int moduli_period = 10;

  BlockPenalties penalties;
  TieReducer tie_reducer = TieReducer::mean;
  /// false freezes H at its initial value (a plain Tucker model when H = 0).
  bool update_h = true;

  int max_iters = 500;
  /// Defaults to 1e-6 * ||X_Omega||_F.
  std::optional<double> tol_primal;
  double tol_step = 1e-8;
  /// Abort when the Lagrangian exceeds this multiple of its initial magnitude.
  double divergence_factor = 10.0;

  ZSolverConfig z_solver;
  /// Initial dual; defaults to -grad F(Z_0).
  std::optional<DenseTensor> initial_dual;
};

struct TraceRow {
  int iter = 0;
  double lagrangian = 0.0;
  double loss = 0.0;
  double primal_residual = 0.0;  // ||R - Z||_F
  double dual_step = 0.0;        // ||Y_k+1 - Y_k||_F
  double z_step = 0.0;
  std::vector<double> factor_steps;
  double g_step = 0.0;
  double h_step = 0.0;
  int z_inner_iters = 0;
  double z_grad_norm = 0.0;
  double wall_time = 0.0;  // seconds since solve start

  double total_step() const;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
};

struct SolverState {
  DcotModel model;
  DenseTensor z;
  DenseTensor y;
  int iter = 0;
  ConvergenceTrace trace;
};

/// Working moduli after estimation.
struct Moduli {
  double gamma = 0.0;
  std::vector<double> rho_factor;
  double rho_g = 0.0;
  double rho_h = 0.0;
};

/// M = gamma (R - Z - Y / gamma)
DenseTensor residual_tensor(const SolverState& state, double gamma);

/// Gradient of Lbar with respect to U^(n) at the current state.
DenseMatrix factor_gradient(const SolverState& state, Index n, double gamma);
/// Gradient of Lbar with respect to G (identical for H): M x_1 U^(1)^T ... x_N U^(N)^T.
DenseTensor core_gradient(const SolverState& state, double gamma);

DenseMatrix update_factor(const SolverState& state, Index n, const SolverConfig& config, const Moduli& moduli);

struct CoreUpdate {
  DenseTensor g;
  DenseTensor h;
};
/// G step, then H step with the gradient recomputed at the new G, then tie.
CoreUpdate update_cores(const SolverState& state, const SolverConfig& config, const Moduli& moduli);

struct ZUpdate {
  DenseTensor z;
  int inner_iterations = 0;
  double grad_norm = 0.0;
  bool converged = true;
};
ZUpdate update_z(const SolverState& state, const SmoothedLoss& loss, const SolverConfig& config, double gamma);

/// Y - gamma (R - Z)
DenseTensor update_dual(const SolverState& state, double gamma);

double lagrangian_value(const SolverState& state, const SmoothedLoss& loss, const BlockPenalties& penalties,
                        double gamma);

/// safety * gamma * lambda_max(B B^T), B B^T = (S x_{k!=n} U_k^T U_k)_(n) S_(n)^T.
double factor_modulus(const SolverState& state, Index n, const SolverConfig& config, double gamma);
/// safety * gamma * prod_k lambda_max(U_k^T U_k)
double core_modulus(const SolverState& state, const SolverConfig& config, double gamma);

/// gamma from the loss bound (when enforced), then block moduli from
/// power iteration on the current model.
Moduli estimate_moduli(const SolverState& state, const SmoothedLoss& loss, const SolverConfig& config);

/// Lipschitz bound of the loss gradient used for gamma.
double loss_lipschitz_for(const SmoothedLoss& loss, const SolverConfig& config);

/// Z_0: observed values, unobserved cells at the observed mean (0 for bernoulli).
DenseTensor initial_z(const ObservationSet& omega, const LossFamily& family);

struct SolveResult {
  SolverState state;
  Moduli moduli;
  std::string stop_reason;  // "converged" or "max_iters"
};

SolveResult solve(const ObservationSet& omega, const DcotModel& init, const LossFamily& family,
                  const SimilarityModel& sim, const SolverConfig& config);

/// Same, with a precomputed loss (its statistics are the expensive part).
SolveResult solve(const ObservationSet& omega, const DcotModel& init, const SmoothedLoss& loss,
                  const SolverConfig& config);

}  // namespace dcot
