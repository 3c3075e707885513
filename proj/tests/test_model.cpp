#include <doctest.h>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/model.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("partition validation") {
  const Shape core{3, 3, 3};
  CHECK_NOTHROW(four_group_partition().validate(core));
  SubjectPartition p;
  p.groups = {{{0, 3}, std::nullopt}};
  CHECK_THROWS_AS(p.validate(core), DimensionError);
  p.groups = {{{0, 1}, std::nullopt}, {{1, 2}, std::nullopt}};
  CHECK_THROWS_AS(p.validate(core), DimensionError);
  p.groups = {{{0, 1}, FixedIndex{0, 1}}};
  CHECK_THROWS_AS(p.validate(core), DimensionError);
  p.groups = {{{}, std::nullopt}};
  CHECK_THROWS_AS(p.validate(core), DimensionError);
  // The same slices may appear in two groups when their fixed indices differ.
  p.groups = {{{0, 1}, FixedIndex{1, 0}}, {{0, 1}, FixedIndex{1, 2}}};
  CHECK_NOTHROW(p.validate(core));
}

TEST_CASE("mean tie averages the grouped slices") {
  DenseTensor h(Shape{3, 2}, {1, 2, 3, 4, 5, 6});
  SubjectPartition p;
  p.groups = {{{0, 1}, std::nullopt}};
  const DenseTensor tied = tie_heterogeneous_core(h, p);
  CHECK(tied == DenseTensor(Shape{3, 2}, {1.5, 1.5, 3, 4.5, 4.5, 6}));
  CHECK(is_tied(tied, p));
  CHECK_FALSE(is_tied(h, p));
  CHECK(tie_heterogeneous_core(h, p, TieReducer::representative) == DenseTensor(Shape{3, 2}, {1, 1, 3, 4, 4, 6}));
}

TEST_CASE("fixed index restricts the tie") {
  DenseTensor h(Shape{2, 2}, {1, 2, 3, 4});
  SubjectPartition p;
  p.groups = {{{0, 1}, FixedIndex{1, 1}}};
  CHECK(tie_heterogeneous_core(h, p) == DenseTensor(Shape{2, 2}, {1, 2, 3.5, 3.5}));
}

TEST_CASE("tying is idempotent bitwise") {
  Rng rng(21);
  const SubjectPartition p = four_group_partition();
  for (int k = 0; k < 10; ++k) {
    const DenseTensor h = random_tensor(Shape{3, 3, 3}, rng);
    for (TieReducer r : {TieReducer::mean, TieReducer::representative}) {
      const DenseTensor once = tie_heterogeneous_core(h, p, r);
      CHECK(is_tied(once, p));
      CHECK(tie_heterogeneous_core(once, p, r) == once);
    }
  }
}

TEST_CASE("reconstruct is the multilinear product of G + H") {
  Rng rng(22);
  DcotModel m;
  m.core_g = random_tensor(Shape{2, 2, 2}, rng);
  m.core_h = random_tensor(Shape{2, 2, 2}, rng);
  for (Index n : {3, 4, 2}) m.factors.push_back(random_matrix(n, 2, rng));
  const DenseTensor expected = brute_multilinear(m.core_g + m.core_h, m.factors);
  CHECK(max_abs_diff(reconstruct(m).data(), expected.data()) <= 1e-13);
  CHECK(m.data_shape() == Shape{3, 4, 2});
  m.core_h = DenseTensor(Shape{2, 3, 2});
  CHECK_THROWS_AS(m.validate(), DimensionError);
}

TEST_CASE("initialization") {
  Rng rng(23);
  const DenseTensor x = random_tensor(Shape{5, 4, 3}, rng);
  SUBCASE("hosvd factors are orthonormal and the core is the projection") {
    const DcotModel m = initialize_model(x, {2, 3, 2}, {InitKind::hosvd, 0}, {});
    for (const auto& u : m.factors) {
      const DenseMatrix utu = matmul_tn(u, u);
      CHECK(max_abs_diff(utu.data(), DenseMatrix::identity(u.cols()).data()) <= 1e-12);
    }
    CHECK(max_abs_diff(m.core_g.data(), brute_multilinear_transposed(x, m.factors).data()) <= 1e-12);
    CHECK(m.core_h == m.core_g);
  }
  SUBCASE("hosvd with full ranks reproduces the tensor") {
    const DcotModel m = initialize_model(x, {5, 4, 3}, {InitKind::hosvd, 0}, {});
    DcotModel g = m;
    g.core_h = DenseTensor(m.core_g.shape());
    CHECK(max_abs_diff(reconstruct(g).data(), x.data()) <= 1e-12);
  }
  SUBCASE("random init depends only on the seed") {
    const auto a = init_factors(x, {2, 2, 2}, {InitKind::random, 5});
    const auto b = init_factors(x, {2, 2, 2}, {InitKind::random, 5});
    const auto c = init_factors(x, {2, 2, 2}, {InitKind::random, 6});
    CHECK(a[0] == b[0]);
    CHECK_FALSE(a[0] == c[0]);
  }
  SUBCASE("identity needs full ranks") {
    CHECK_THROWS_AS(init_factors(x, {2, 4, 3}, {InitKind::identity, 0}), DimensionError);
    const auto u = init_factors(x, {5, 4, 3}, {InitKind::identity, 0});
    CHECK(u[1] == DenseMatrix::identity(4));
  }
  SUBCASE("ranks are checked") {
    CHECK_THROWS_AS(init_factors(x, {6, 2, 2}, {InitKind::hosvd, 0}), DimensionError);
    CHECK_THROWS_AS(init_factors(x, {2, 2}, {InitKind::hosvd, 0}), DimensionError);
  }
}
