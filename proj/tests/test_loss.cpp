#include <doctest.h>

#include <cmath>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/loss.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("loss gradients match central differences") {
  for (FamilyKind f : {FamilyKind::gaussian, FamilyKind::bernoulli, FamilyKind::poisson, FamilyKind::gamma}) {
    CAPTURE(to_string(f));
    const SuiteResult r = loss_gradient_suite(f);
    INFO(r.detail);
    CHECK(r.pass);
    CHECK(r.cases == 20);
  }
}

TEST_CASE("unsmoothed gaussian loss is the mean squared error over all cells") {
  const Shape shape{2, 2};
  ObservationSet omega(shape);
  omega.add({0, 0}, 1.0);
  omega.add({1, 1}, -2.0);
  const DenseTensor z(shape, {0.5, 7.0, 3.0, -1.0});
  const double value = loss_value(LossFamily{}, SimilarityModel::unsmoothed(shape), omega, z);
  CHECK(value == doctest::Approx((0.25 + 1.0) / 4.0));
}

TEST_CASE("per-target losses") {
  const Shape shape{1};
  ObservationSet omega(shape);
  omega.add({0}, 2.0);
  const auto sim = SimilarityModel::unsmoothed(shape);
  const double z = 1.5;
  CHECK(SmoothedLoss({FamilyKind::gaussian}, sim, omega).target_value(0, z) == doctest::Approx(0.25));
  CHECK(SmoothedLoss({FamilyKind::poisson}, sim, omega).target_value(0, z) == doctest::Approx(z - 2.0 * std::log(z)));
  const double eps = 1e-6;
  CHECK(SmoothedLoss({FamilyKind::gamma, eps}, sim, omega).target_value(0, z) ==
        doctest::Approx(std::log(z + eps) + 2.0 / (z + eps)));
  ObservationSet ones(shape);
  ones.add({0}, 1.0);
  CHECK(SmoothedLoss({FamilyKind::bernoulli}, sim, ones).target_value(0, z) ==
        doctest::Approx(std::log1p(std::exp(z)) - z));
}

TEST_CASE("observations outside the support are rejected") {
  const Shape shape{2};
  ObservationSet omega(shape);
  omega.add({0}, -1.0);
  CHECK_NOTHROW(validate_observations({FamilyKind::gaussian}, omega));
  CHECK_THROWS_AS(validate_observations({FamilyKind::poisson}, omega), DomainError);
  CHECK_THROWS_AS(validate_observations({FamilyKind::gamma}, omega), DomainError);
  CHECK_THROWS_AS(validate_observations({FamilyKind::bernoulli}, omega), DomainError);
  ObservationSet half(shape);
  half.add({0}, 0.5);
  CHECK_THROWS_AS(validate_observations({FamilyKind::bernoulli}, half), DomainError);
}

TEST_CASE("lipschitz bound holds on random pairs") {
  Rng rng(41);
  const Shape shape{3, 3, 2};
  for (FamilyKind f : {FamilyKind::gaussian, FamilyKind::bernoulli, FamilyKind::poisson, FamilyKind::gamma}) {
    CAPTURE(to_string(f));
    ObservationSet omega(shape);
    for (Index t = 0; t < shape.size(); t += 2)
      omega.add(shape.multi_index(t), f == FamilyKind::bernoulli ? static_cast<double>(t % 4 == 0) : 1.0 + t % 3);
    const SmoothedLoss loss({f}, SimilarityModel::uniform(shape), omega);
    const bool positive = f == FamilyKind::poisson || f == FamilyKind::gamma;
    const double z_min = 0.5;
    const double lf = positive ? loss.lipschitz(z_min) : loss.lipschitz();
    for (int k = 0; k < 20; ++k) {
      const DenseTensor a = positive ? random_tensor(shape, rng, z_min, 3.0) : random_tensor(shape, rng, -3.0, 3.0);
      const DenseTensor b = positive ? random_tensor(shape, rng, z_min, 3.0) : random_tensor(shape, rng, -3.0, 3.0);
      CHECK(frob_distance(loss.gradient(a), loss.gradient(b)) <= lf * frob_distance(a, b) * (1 + 1e-12));
    }
  }
}

TEST_CASE("family names round-trip") {
  for (FamilyKind f : {FamilyKind::gaussian, FamilyKind::bernoulli, FamilyKind::poisson, FamilyKind::gamma})
    CHECK(family_from_string(to_string(f)) == f);
  CHECK_THROWS(family_from_string("student"));
}
