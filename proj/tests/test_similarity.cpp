#include <doctest.h>

#include <cmath>
#include <numeric>

#include "checks.hpp"
#include "dcot/error.hpp"
#include "dcot/similarity.hpp"

using namespace dcot;
using namespace dcot::checks;

TEST_CASE("kernels") {
  CHECK(Kernel{KernelKind::gaussian}(0.0) == 1.0);
  CHECK(Kernel{KernelKind::gaussian}(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(Kernel{KernelKind::euclid}(0.5) == doctest::Approx(0.75));
  CHECK(Kernel{KernelKind::euclid}(1.5) == 0.0);
  CHECK(Kernel{KernelKind::truncated, 0.5}(0.0) == 0.5);
  CHECK(Kernel{KernelKind::truncated, 0.5}(2.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("label consistency") {
  const DenseMatrix c = label_consistency({0, 0, 1}, 0.8, 0.2);
  CHECK(c == DenseMatrix::from_rows({{0.8, 0.8, 0.2}, {0.8, 0.8, 0.2}, {0.2, 0.2, 0.8}}));
}

TEST_CASE("mode similarity is symmetric with unit diagonal") {
  const std::vector<std::vector<double>> f{{0.0}, {1.0}, {3.0}};
  const auto h = default_bandwidths(f);
  CHECK(h.size() == 10);
  const ModeSimilarity ms = mode_similarity(0, f, Kernel{}, h);
  for (Index i = 0; i < 3; ++i) {
    CHECK(ms.s(i, i) == doctest::Approx(1.0));
    for (Index j = 0; j < 3; ++j) CHECK(ms.s(i, j) == ms.s(j, i));
  }
  CHECK(ms.s(0, 1) > ms.s(0, 2));
}

TEST_CASE("unsmoothed model uses each observed cell alone") {
  const Shape shape{2, 3};
  ObservationSet omega(shape);
  omega.add({0, 0}, 2.0);
  omega.add({1, 2}, -1.0);
  const auto st = smoothing_statistics(SimilarityModel::unsmoothed(shape), omega);
  CHECK(st.w[0] == 1.0);
  CHECK(st.m[0] == 2.0);
  CHECK(st.q[0] == 4.0);
  CHECK(st.w[5] == 1.0);
  CHECK(st.m[5] == -1.0);
  CHECK(st.w[1] == 0.0);
  CHECK(st.empty_targets == 4);
}

TEST_CASE("uniform normalized weights average the observed set") {
  const Shape shape{2, 2};
  ObservationSet omega(shape);
  omega.add({0, 0}, 1.0);
  omega.add({1, 1}, 3.0);
  const auto st = smoothing_statistics(SimilarityModel::uniform(shape), omega);
  for (Index t = 0; t < 4; ++t) {
    CHECK(st.w[t] == doctest::Approx(1.0));
    CHECK(st.m[t] == doctest::Approx(2.0));
    CHECK(st.q[t] == doctest::Approx(5.0));
  }
}

TEST_CASE("weights are Kronecker products") {
  Rng rng(31);
  SimilarityModel sim;
  sim.neighbor_cap = 10;
  sim.normalized = false;
  for (Index n = 0; n < 2; ++n) {
    std::vector<std::vector<double>> f(3);
    for (auto& row : f) row = {std::uniform_real_distribution<double>(0, 1)(rng)};
    auto ms = mode_similarity(n, f, Kernel{}, default_bandwidths(f));
    ms.c = label_consistency({0, 1, 1});
    sim.per_mode.push_back(ms);
  }
  const Shape shape{3, 3};
  const ObservationSet omega = ObservationSet::from_dense(random_tensor(shape, rng));
  const std::vector<Index> target{1, 2};
  const auto w = smoothing_weights(sim, target, omega);
  CHECK(w.sources.size() == 9);
  for (const auto& s : w.sources) {
    const double expected =
        sim.per_mode[0].s(1, s.index[0]) * sim.per_mode[0].c(1, s.index[0]) * sim.per_mode[1].s(2, s.index[1]) *
        sim.per_mode[1].c(2, s.index[1]);
    CHECK(s.weight == doctest::Approx(expected).epsilon(1e-14));
    CHECK(kronecker_weight(sim, target, s.index) == doctest::Approx(expected).epsilon(1e-14));
  }
  for (Index k = 1; k < w.sources.size(); ++k) CHECK(w.sources[k - 1].weight >= w.sources[k].weight);
  sim.normalized = true;
  const auto nw = smoothing_weights(sim, target, omega);
  double total = 0.0;
  for (const auto& s : nw.sources) total += s.weight;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("neighbor cap truncates each mode's candidates") {
  const Shape shape{4, 4};
  SimilarityModel sim = SimilarityModel::uniform(shape);
  sim.neighbor_cap = 2;
  const ObservationSet omega = ObservationSet::from_dense(DenseTensor(shape, 1.0));
  const std::vector<Index> target{0, 0};
  CHECK(smoothing_weights(sim, target, omega).sources.size() == 4);
}

TEST_CASE("zero-weight targets fall back or are skipped") {
  const Shape shape{3, 1};
  SimilarityModel sim;
  sim.neighbor_cap = 3;
  sim.per_mode.push_back({0, DenseMatrix::identity(3), DenseMatrix(3, 3, 1.0)});
  sim.per_mode.push_back({1, DenseMatrix(1, 1, 1.0), DenseMatrix(1, 1, 1.0)});
  ObservationSet omega(shape);
  omega.add({0, 0}, 1.0);
  omega.add({1, 0}, 5.0);

  const std::vector<Index> unobserved{2, 0};
  const auto w = smoothing_weights(sim, unobserved, omega);
  CHECK(w.fallback_applied);
  REQUIRE(w.sources.size() == 2);
  CHECK(w.sources[0].weight == doctest::Approx(0.5));
  const auto st = smoothing_statistics(sim, omega);
  CHECK(st.fallback_targets == 1);
  CHECK(st.m[2] == doctest::Approx(3.0));

  sim.zero_weight = ZeroWeightPolicy::skip;
  CHECK(smoothing_weights(sim, unobserved, omega).sources.empty());
  const auto skipped = smoothing_statistics(sim, omega);
  CHECK(skipped.w[2] == 0.0);
  CHECK(skipped.empty_targets == 1);
}

TEST_CASE("similarity validation") {
  SimilarityModel sim;
  sim.per_mode.push_back({0, DenseMatrix(2, 2, 1.0), DenseMatrix(2, 2, 2.0)});
  CHECK_THROWS(sim.validate());
  sim.per_mode[0].c = DenseMatrix(2, 2, 1.0);
  sim.per_mode[0].s(0, 1) = -1.0;
  CHECK_THROWS(sim.validate());
}
