#pragma once

// Small dense factorizations used by initialization, SVT and modulus
// estimation. Backed by Eigen.

#include <vector>

#include "dcot/tensor.hpp"

namespace dcot {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column k pairs with values[k]
};

/// Eigendecomposition of a symmetric matrix (only the lower triangle is read).
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

struct Svd {
  DenseMatrix u;               // rows x k, orthonormal columns
  std::vector<double> sigma;   // descending, k = min(rows, cols)
  DenseMatrix v;               // cols x k, orthonormal columns
};

Svd thin_svd(const DenseMatrix& a);

/// Orthonormal basis for the column space of a full-column-rank matrix (QR).
DenseMatrix orthonormalize_columns(const DenseMatrix& a);

struct PowerIterationResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration from a fixed deterministic start vector.
PowerIterationResult power_iteration(const DenseMatrix& a, int max_iters = 50, double tol = 1e-8);

}  // namespace dcot
