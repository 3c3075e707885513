#include <doctest.h>

#include <cmath>
#include <set>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/evaluation.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("rmse") {
  const Shape shape{2, 2};
  const DenseTensor z(shape, {1, 2, 3, 4});
  CHECK(rmse(z, ObservationSet::from_dense(z)) == 0.0);
  ObservationSet ref(shape);
  ref.add({0, 0}, 0.0);
  ref.add({1, 1}, 2.0);
  CHECK(rmse(z, ref) == doctest::Approx(std::sqrt((1.0 + 4.0) / 2.0)));
  CHECK_THROWS(rmse(DenseTensor(Shape{3}), ref));
}

TEST_CASE("lambda grid is exact") {
  const auto grid = lambda_grid();
  REQUIRE(grid.size() == 61);
  CHECK(grid == exact_lambda_grid());
  CHECK(grid.front() == 1e-3);
  CHECK(grid[30] == 1.0);
  CHECK(grid.back() == 1e3);
}

TEST_CASE("holdout split") {
  Rng rng(51);
  const Shape shape{5, 4};
  const ObservationSet omega = ObservationSet::from_dense(random_tensor(shape, rng));
  const Split s = holdout_split(omega, {0.75, 3});
  CHECK(s.train.size() == 15);
  CHECK(s.test.size() == 5);
  std::set<Index> seen;
  for (const auto* part : {&s.train, &s.test})
    for (Index k = 0; k < part->size(); ++k) {
      CHECK(seen.insert(part->linear(k)).second);
      CHECK(part->entries()[k].value == omega.entries()[*omega.find(part->linear(k))].value);
      if (k > 0) CHECK(part->linear(k - 1) < part->linear(k));
    }
  CHECK(seen.size() == 20);
  const Split again = holdout_split(omega, {0.75, 3});
  for (Index k = 0; k < s.train.size(); ++k) CHECK(again.train.linear(k) == s.train.linear(k));
  const Split other = holdout_split(omega, {0.75, 4});
  bool differs = false;
  for (Index k = 0; k < s.train.size(); ++k) differs = differs || other.train.linear(k) != s.train.linear(k);
  CHECK(differs);
  CHECK(holdout_split(omega, {0.999, 0}).test.size() == 1);
  CHECK_THROWS_AS(holdout_split(omega, {1.0, 0}), DomainError);
}

TEST_CASE("synthetic data") {
  SynthSpec s;
  s.shape = Shape{10, 8, 6};
  s.ranks = {3, 3, 2};
  s.partition = four_group_partition();
  s.noise.sigma = 0.1;
  s.missing_fraction = 0.25;
  s.seed = 8;
  const SynthData d = synthesize(s);
  CHECK(d.truth.size() == 480);
  CHECK(d.observed.size() == 480 - 120);
  CHECK(is_tied(d.planted.core_h, s.partition));
  CHECK(frob_norm(d.planted.core_h) == doctest::Approx(frob_norm(d.planted.core_g)));
  for (const auto& u : d.planted.factors) {
    const DenseMatrix utu = matmul_tn(u, u);
    CHECK(max_abs_diff(utu.data(), DenseMatrix::identity(u.cols()).data()) <= 1e-12);
  }
  const DenseTensor z = reconstruct(d.planted);
  CHECK(rmse(z, d.truth) == 0.0);
  CHECK(rmse(z, d.observed) == doctest::Approx(0.1).epsilon(0.2));
  double sq = 0.0;
  for (double v : z.values()) sq += v * v;
  CHECK(std::sqrt(sq / 480) == doctest::Approx(1.0).epsilon(0.3));
  CHECK(d.labels.size() == 3);
  CHECK(d.labels[0].size() == 10);
  CHECK(d.sim.neighbor_cap == s.neighbor_cap);

  const SynthData again = synthesize(s);
  CHECK(again.planted.core_g == d.planted.core_g);
  for (Index k = 0; k < d.observed.size(); ++k) CHECK(again.observed.entries()[k].value == d.observed.entries()[k].value);
}

TEST_CASE("synthetic data for other families stays in the support") {
  for (FamilyKind f : {FamilyKind::bernoulli, FamilyKind::poisson, FamilyKind::gamma}) {
    CAPTURE(to_string(f));
    SynthSpec s;
    s.shape = Shape{6, 6, 6};
    s.ranks = {2, 2, 2};
    s.noise = {f, 0.2};
    s.seed = 2;
    const SynthData d = synthesize(s);
    CHECK_NOTHROW(validate_observations({f}, d.observed));
    if (f != FamilyKind::bernoulli)
      for (const auto& u : d.planted.factors)
        for (double v : u.values()) CHECK(v >= 0.0);
  }
}

TEST_CASE("synth parameter validation") {
  SynthSpec s;
  s.shape = Shape{4, 4};
  s.ranks = {5, 2};
  CHECK_THROWS(s.validate());
  s.ranks = {2, 2};
  s.missing_fraction = 1.0;
  CHECK_THROWS(s.validate());
  s.missing_fraction = 0.5;
  s.clusters = 1;
  CHECK_THROWS(s.validate());
}

TEST_CASE("grid search picks the best validation point") {
  SynthSpec s;
  s.shape = Shape{8, 8, 8};
  s.ranks = {2, 2, 2};
  s.noise.sigma = 0.3;
  s.missing_fraction = 0.3;
  s.seed = 12;
  const SynthData d = synthesize(s);
  const Split split = holdout_split(d.observed, {0.8, 1});
  const DcotModel init = initialize_model(initial_z(split.train, {}), s.ranks, {InitKind::hosvd, 0}, {});
  const SmoothedLoss loss(LossFamily{}, SimilarityModel::unsmoothed(s.shape), split.train);
  SolverConfig base;
  base.max_iters = 30;
  base.penalties.core_g = {PenaltyKind::frob_sq, 0.0};
  base.penalties.core_h = {PenaltyKind::frob_sq, 0.0};

  GridOptions shared{{0.001, 0.1, 10.0}, false, 2};
  const GridResult g = grid_search(split.train, split.test, init, loss, base, shared);
  REQUIRE(g.rows.size() == 3);
  for (const auto& row : g.rows) {
    CHECK(row.status == "ok");
    CHECK(row.lambdas.size() == 5);
    CHECK(row.lambdas[0] == row.lambdas[1]);
    CHECK(row.lambdas[2] == 0.0);
    CHECK(g.best_row().validation_rmse <= row.validation_rmse);
  }
  GridOptions serial = shared;
  serial.threads = 1;
  const GridResult again = grid_search(split.train, split.test, init, loss, base, serial);
  for (Index k = 0; k < 3; ++k) CHECK(again.rows[k].validation_rmse == g.rows[k].validation_rmse);

  GridOptions product{{0.001, 0.1}, true, 3};
  CHECK(grid_search(split.train, split.test, init, loss, base, product).rows.size() == 4);
}
