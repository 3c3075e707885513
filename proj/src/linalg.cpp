#include "dcot/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "dcot/error.hpp"

namespace dcot {

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  return Eigen::Map<const Eigen::MatrixXd>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                           static_cast<Eigen::Index>(m.cols()));
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<Index>(m.rows()), static_cast<Index>(m.cols()));
  Eigen::Map<Eigen::MatrixXd>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace

SymmetricEigen symmetric_eigen(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_eigen: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(a));
  if (solver.info() != Eigen::Success) throw SolverError("symmetric_eigen: decomposition failed");
  // Eigen returns ascending order.
  const auto n = static_cast<Index>(a.rows());
  SymmetricEigen out{std::vector<double>(n), DenseMatrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index src = n - 1 - k;
    out.values[k] = solver.eigenvalues()(static_cast<Eigen::Index>(src));
    for (Index i = 0; i < n; ++i)
      out.vectors(i, k) = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(src));
  }
  return out;
}

Svd thin_svd(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out;
  out.u = from_eigen(svd.matrixU());
  out.v = from_eigen(svd.matrixV());
  out.sigma.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  return out;
}

DenseMatrix orthonormalize_columns(const DenseMatrix& a) {
  if (a.cols() > a.rows()) throw DimensionError("orthonormalize_columns: more columns than rows");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(a));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Fix signs so that R has a nonnegative diagonal; keeps the result a
  // deterministic function of the input.
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return from_eigen(q);
}

PowerIterationResult power_iteration(const DenseMatrix& a, int max_iters, double tol) {
  if (a.rows() != a.cols()) throw DimensionError("power_iteration: matrix must be square");
  const Index n = a.rows();
  PowerIterationResult res;
  if (n == 0) {
    res.converged = true;
    return res;
  }
  // Deterministic, generic start vector (not orthogonal to any coordinate axis).
  std::vector<double> x(n), y(n);
  for (Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
  double nx = 0.0;
  for (double v : x) nx += v * v;
  nx = std::sqrt(nx);
  for (double& v : x) v /= nx;

  double prev = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    double rayleigh = 0.0;
    double ny = 0.0;
    for (Index i = 0; i < n; ++i) {
      rayleigh += x[i] * y[i];
      ny += y[i] * y[i];
    }
    ny = std::sqrt(ny);
    res.value = rayleigh;
    res.iterations = it;
    if (ny == 0.0) {
      res.value = 0.0;
      res.converged = true;
      return res;
    }
    for (Index i = 0; i < n; ++i) x[i] = y[i] / ny;
    if (it > 1 && std::abs(rayleigh - prev) <= tol * std::max(1.0, std::abs(rayleigh))) {
      res.converged = true;
      return res;
    }
    prev = rayleigh;
  }
  return res;
}

}  // namespace dcot
