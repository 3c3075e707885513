#include <doctest.h>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/linalg.hpp"
#include "dcot/tensor.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("shape indexing is first-mode-fastest") {
  const Shape s{2, 3, 4};
  CHECK(s.size() == 24);
  const std::vector<Index> idx{1, 2, 3};
  CHECK(s.linear_index(idx) == 1 + 2 * (2 + 3 * 3));
  CHECK(s.multi_index(23) == idx);
  for (Index k = 0; k < s.size(); ++k) CHECK(s.linear_index(s.multi_index(k)) == k);
  const std::vector<Index> bad{2, 0, 0};
  CHECK_THROWS_AS(s.linear_index(bad), DimensionError);
}

TEST_CASE("matricize of a 2x2x2 tensor") {
  DenseTensor t(Shape{2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  const DenseMatrix m1 = matricize(t, 1);
  CHECK(m1 == DenseMatrix::from_rows({{1, 2, 5, 6}, {3, 4, 7, 8}}));
  const DenseMatrix m2 = matricize(t, 2);
  CHECK(m2 == DenseMatrix::from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}}));
}

TEST_CASE("algebra agrees with loop oracles on every small shape") {
  const SuiteResult r = algebra_suite();
  INFO(r.detail);
  CHECK(r.pass);
  CHECK(r.cases > 1000);
}

TEST_CASE("kron follows the block convention") {
  const DenseMatrix a = DenseMatrix::from_rows({{1, 2}});
  const DenseMatrix b = DenseMatrix::from_rows({{0, 1}, {1, 0}});
  CHECK(kron(a, b) == DenseMatrix::from_rows({{0, 1, 0, 2}, {1, 0, 2, 0}}));
}

TEST_CASE("transposed products match explicit transposes") {
  Rng rng(9);
  const DenseMatrix a = random_matrix(4, 3, rng), b = random_matrix(4, 2, rng), c = random_matrix(5, 3, rng);
  CHECK(max_abs_diff(matmul_tn(a, b).data(), matmul(a.transpose(), b).data()) <= 1e-14);
  CHECK(max_abs_diff(matmul_nt(a, c).data(), matmul(a, c.transpose()).data()) <= 1e-14);
}

TEST_CASE("multilinear product adjoint identity") {
  Rng rng(10);
  const DenseTensor core = random_tensor(Shape{2, 3, 2}, rng);
  const std::vector<DenseMatrix> u{random_matrix(4, 2, rng), random_matrix(3, 3, rng), random_matrix(5, 2, rng)};
  const DenseTensor y = random_tensor(Shape{4, 3, 5}, rng);
  CHECK(frob_inner(multilinear_product(core, u), y) ==
        doctest::Approx(frob_inner(core, multilinear_product_transposed(y, u))).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  const DenseTensor a(Shape{2, 3}), b(Shape{3, 2});
  CHECK_THROWS_AS(frob_inner(a, b), DimensionError);
  CHECK_THROWS_AS(n_mode_product(a, DenseMatrix(2, 2), 1), DimensionError);
  CHECK_THROWS_AS(matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(fold(DenseMatrix(2, 3), 0, Shape{2, 2}), DimensionError);
}

TEST_CASE("symmetric eigen and svd reconstruct their input") {
  Rng rng(11);
  const DenseMatrix a = random_matrix(5, 3, rng);
  const Svd svd = thin_svd(a);
  DenseMatrix us = svd.u;
  for (Index j = 0; j < us.cols(); ++j)
    for (Index i = 0; i < us.rows(); ++i) us(i, j) *= svd.sigma[j];
  CHECK(max_abs_diff(matmul_nt(us, svd.v).data(), a.data()) <= 1e-12);
  CHECK(std::is_sorted(svd.sigma.rbegin(), svd.sigma.rend()));

  const DenseMatrix g = matmul_tn(a, a);
  const SymmetricEigen e = symmetric_eigen(g);
  CHECK(e.values[0] == doctest::Approx(svd.sigma[0] * svd.sigma[0]).epsilon(1e-12));
  const PowerIterationResult p = power_iteration(g, 500, 1e-14);
  CHECK(p.value == doctest::Approx(e.values[0]).epsilon(1e-8));
}

TEST_CASE("orthonormalize_columns returns an orthonormal basis") {
  Rng rng(12);
  const DenseMatrix q = orthonormalize_columns(random_matrix(6, 3, rng));
  const DenseMatrix qtq = matmul_tn(q, q);
  CHECK(max_abs_diff(qtq.data(), DenseMatrix::identity(3).data()) <= 1e-13);
}
