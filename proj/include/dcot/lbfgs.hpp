#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace dcot {

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 50;
  /// Stop once the projected gradient's infinity norm falls to this value.
  double grad_tol = 1e-8;
  /// Common lower bound on every coordinate (projected variant when finite).
  double lower_bound = -std::numeric_limits<double>::infinity();
  int max_line_search = 40;
  double armijo = 1e-4;
};

struct LbfgsResult {
  int iterations = 0;
  double value = 0.0;
  double grad_norm = 0.0;  // projected, infinity norm
  bool converged = false;
};

/// f(x, grad) returns the objective and writes its gradient.
using LbfgsObjective = std::function<double(std::span<const double>, std::span<double>)>;

/// Limited-memory BFGS with backtracking Armijo search. With a finite lower
/// bound, variables sitting on the bound with an outward gradient are held
/// fixed and trial points are projected back onto the box.
LbfgsResult lbfgs_minimize(const LbfgsObjective& f, std::vector<double>& x, const LbfgsOptions& opts);

}  // namespace dcot
