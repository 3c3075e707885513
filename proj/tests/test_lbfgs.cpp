#include <doctest.h>

#include <cmath>

#include "dcot/lbfgs.hpp"

using namespace dcot;

TEST_CASE("minimizes a separable quadratic") {
  const std::vector<double> target{1.0, -2.0, 3.0};
  const std::vector<double> scale{1.0, 10.0, 0.1};
  auto f = [&](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      v += 0.5 * scale[k] * (x[k] - target[k]) * (x[k] - target[k]);
      g[k] = scale[k] * (x[k] - target[k]);
    }
    return v;
  };
  std::vector<double> x(3, 0.0);
  LbfgsOptions opts;
  opts.max_iters = 200;
  opts.grad_tol = 1e-12;
  const LbfgsResult r = lbfgs_minimize(f, x, opts);
  CHECK(r.converged);
  for (std::size_t k = 0; k < 3; ++k) CHECK(x[k] == doctest::Approx(target[k]).epsilon(1e-10));
}

TEST_CASE("respects a lower bound") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2.0 * (x[0] + 1.0);
    g[1] = 2.0 * (x[1] - 2.0);
    return (x[0] + 1.0) * (x[0] + 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
  };
  std::vector<double> x{1.0, 1.0};
  LbfgsOptions opts;
  opts.lower_bound = 0.5;
  opts.max_iters = 200;
  opts.grad_tol = 1e-12;
  const LbfgsResult r = lbfgs_minimize(f, x, opts);
  CHECK(r.converged);
  CHECK(x[0] == 0.5);
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-10));
}
