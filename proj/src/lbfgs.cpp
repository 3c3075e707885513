#include "dcot/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "dcot/error.hpp"

namespace dcot {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& f, std::vector<double>& x, const LbfgsOptions& opts) {
  if (opts.memory < 1) throw DomainError("lbfgs: memory must be positive");
  const std::size_t n = x.size();
  const double lb = opts.lower_bound;
  const bool bounded = std::isfinite(lb);
  if (bounded)
    for (double& v : x) v = std::max(v, lb);

  std::vector<double> g(n), d(n), x_new(n), g_new(n), alpha(static_cast<std::size_t>(opts.memory));
  std::vector<bool> fixed(n, false);
  std::deque<Pair> history;

  auto projected_norm = [&](std::span<const double> xv, std::span<const double> gv) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_bound = bounded && xv[i] <= lb && gv[i] > 0.0;
      if (!at_bound) m = std::max(m, std::abs(gv[i]));
    }
    return m;
  };

  LbfgsResult res;
  res.value = f(x, g);
  res.grad_norm = projected_norm(x, g);
  if (!std::isfinite(res.value)) throw SolverError("lbfgs: objective is not finite at the starting point");

  for (int it = 0; it < opts.max_iters; ++it) {
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) fixed[i] = bounded && x[i] <= lb && g[i] > 0.0;

    // Two-loop recursion on the free coordinates.
    for (std::size_t i = 0; i < n; ++i) d[i] = fixed[i] ? 0.0 : -g[i];
    const std::size_t k = history.size();
    for (std::size_t j = k; j-- > 0;) {
      const auto& p = history[j];
      alpha[j] = p.rho * dot(p.s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[j] * p.y[i];
    }
    if (k > 0) {
      const auto& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& p = history[j];
      const double beta = p.rho * dot(p.y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += p.s[i] * (alpha[j] - beta);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (fixed[i]) d[i] = 0.0;
    if (dot(d, g) >= 0.0) {
      // Not a descent direction: restart from steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = fixed[i] ? 0.0 : -g[i];
    }

    double step = (k == 0) ? std::min(1.0, 1.0 / std::max(res.grad_norm, 1e-300)) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) {
        x_new[i] = x[i] + step * d[i];
        if (bounded) x_new[i] = std::max(x_new[i], lb);
      }
      f_new = f(x_new, g_new);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
      if (std::isfinite(f_new) && f_new <= res.value + opts.armijo * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) return res;  // no progress possible at this precision

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-16 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y)) && sy > 0.0) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (history.size() > static_cast<std::size_t>(opts.memory)) history.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    res.value = f_new;
    res.grad_norm = projected_norm(x, g);
  }
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

}  // namespace dcot
