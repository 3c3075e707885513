#pragma once

// Oracles and randomized suites shared by the unit tests and the acceptance
// runner.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dcot/evaluation.hpp"
#include "dcot/model.hpp"
#include "dcot/prox.hpp"
#include "dcot/solver.hpp"
#include "dcot/tensor.hpp"

namespace dcot::checks {

using Rng = std::mt19937_64;

DenseTensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);
DenseMatrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Every shape of order 1..max_order with at least one entry and at most max_size entries.
std::vector<Shape> small_shapes(Index max_size, Index max_order);

// Loop oracles.
DenseMatrix brute_matricize(const DenseTensor& t, Index n);
DenseTensor brute_n_mode(const DenseTensor& t, const DenseMatrix& u, Index n);
DenseTensor brute_multilinear(const DenseTensor& core, const std::vector<DenseMatrix>& factors);
DenseTensor brute_multilinear_transposed(const DenseTensor& t, const std::vector<DenseMatrix>& factors);
DenseMatrix brute_kron(const DenseMatrix& a, const DenseMatrix& b);
double brute_inner(const DenseTensor& a, const DenseTensor& b);

double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// Central differences of f at x.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                double h = 1e-5);
/// ||a - b|| / ||b||.
double relative_error(std::span<const double> a, std::span<const double> b);

/// Mode 0, slices {0,1} tied separately for each index of mode 1 (0..2), slice 2 alone.
SubjectPartition four_group_partition();

/// Truth on the cells that were not observed.
ObservationSet unobserved_truth(const SynthData& d);

struct SuiteResult {
  bool pass = true;
  int cases = 0;
  double worst = 0.0;
  std::string detail;

  void fail(const std::string& why);
};

/// Correctly rounded lambda grid values.
std::vector<double> exact_lambda_grid();

SuiteResult algebra_suite(std::uint64_t seed = 1);
SuiteResult coupling_gradient_suite(int instances = 20, std::uint64_t seed = 2);
SuiteResult loss_gradient_suite(FamilyKind family, int instances = 20, std::uint64_t seed = 3);
SuiteResult prox_suite(PenaltyKind kind, int instances = 20, std::uint64_t seed = 4);
SuiteResult prox_identity_suite();
SuiteResult svt_example();
SuiteResult z_update_cross_check(int instances = 20, std::uint64_t seed = 5);

}  // namespace dcot::checks
