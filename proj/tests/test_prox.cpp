#include <doctest.h>

#include <cmath>
#include <limits>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/prox.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("prox outputs minimize the subproblem") {
  for (PenaltyKind k : {PenaltyKind::l1, PenaltyKind::frob_sq, PenaltyKind::nuclear, PenaltyKind::nonneg,
                        PenaltyKind::sparse_group_lasso}) {
    CAPTURE(to_string(k));
    const SuiteResult r = prox_suite(k, 8);
    INFO(r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("zero weight leaves the point unchanged") {
  const SuiteResult r = prox_identity_suite();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("singular value thresholding of diag(3,1)") {
  const SuiteResult r = svt_example();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("closed forms") {
  const DenseTensor p(Shape{4}, {3.0, -0.5, 0.2, -2.0});
  CHECK(prox_apply({PenaltyKind::l1, 1.0}, p, 2.0) == DenseTensor(Shape{4}, {2.5, 0.0, 0.0, -1.5}));
  const DenseTensor ridge = prox_apply({PenaltyKind::frob_sq, 1.0}, p, 2.0);
  for (Index k = 0; k < 4; ++k) CHECK(ridge[k] == doctest::Approx(p[k] * 0.5));
  CHECK(prox_apply({PenaltyKind::nonneg, 1.0}, p, 2.0) == DenseTensor(Shape{4}, {3.0, 0.0, 0.2, 0.0}));
  Penalty group{PenaltyKind::sparse_group_lasso, 2.0};
  group.mix = 0.0;
  group.groups = {{0, 3}, {1, 2}};
  const DenseTensor g = prox_apply(group, p, 1.0);
  const double scale = 1.0 - 2.0 / std::hypot(3.0, 2.0);
  CHECK(g[0] == doctest::Approx(3.0 * scale));
  CHECK(g[3] == doctest::Approx(-2.0 * scale));
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
}

TEST_CASE("penalty values") {
  const DenseTensor p(Shape{3}, {1.0, -2.0, 0.0});
  CHECK(penalty_value({PenaltyKind::l1, 0.5}, p) == 1.5);
  CHECK(penalty_value({PenaltyKind::frob_sq, 0.5}, p) == 2.5);
  CHECK(penalty_value({PenaltyKind::nonneg, 1.0}, p) == std::numeric_limits<double>::infinity());
  CHECK(penalty_value({PenaltyKind::nuclear, 1.0}, DenseMatrix::from_rows({{3, 0}, {0, -1}})) ==
        doctest::Approx(4.0));
}

TEST_CASE("invalid prox arguments") {
  const DenseTensor p(Shape{2, 2, 2}, 1.0);
  CHECK_THROWS_AS(prox_apply({PenaltyKind::l1, 1.0}, p, 0.0), DomainError);
  CHECK_THROWS_AS(prox_apply({PenaltyKind::nuclear, 1.0}, p, 1.0), DimensionError);
  Penalty overlap{PenaltyKind::sparse_group_lasso, 1.0};
  overlap.groups = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(overlap.validate(8), DimensionError);
  CHECK_THROWS(penalty_from_string("elastic"));
}
