#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "stabletail/estimators.hpp"
#include "stabletail/moments.hpp"

using namespace stabletail;

namespace {

Example reg(std::vector<double> x, double y) { return RegressionExample{std::move(x), y}; }

Dataset sample_of(const Distribution& dist, int n, const SeedStream& stream) {
  Rng rng = stream.rng();
  return sample_dataset(dist, static_cast<std::size_t>(n), rng);
}

}  // namespace

TEST_CASE("constant-loss rule: resubstitution, deleted and risk all equal c") {
  const ConstantLossRule rule(0.4);
  const Dataset data({reg({1.0}, 2.0), reg({0.0}, 1.0), reg({2.0}, 0.0)});
  CHECK(resubstitution(rule, data) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(deleted(rule, data) == doctest::Approx(0.4).epsilon(1e-15));

  const RidgeBallDistribution dist(1, 1.0);
  const McRisk risk = mc_risk(rule, rule.fit(data), dist, 100, SeedStream(3));
  CHECK(risk.value == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(risk.se == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("averaging rule: hand-computed estimates on y = {1, 3}") {
  const MeanRule rule;
  const Dataset data({reg({0.0}, 1.0), reg({0.0}, 3.0)});
  // predictor 2, losses {1, 1}
  CHECK(resubstitution(rule, data) == doctest::Approx(1.0).epsilon(1e-14));
  // each fold predicts the other response, loss 4 on both sides
  CHECK(deleted(rule, data) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("deleted requires two examples") {
  const MeanRule rule;
  CHECK_THROWS_WITH_AS((deleted(rule, Dataset({reg({0.0}, 1.0)}))), "needs-two-examples",
                       std::invalid_argument);
  CHECK_THROWS_AS(resubstitution(rule, Dataset()), std::invalid_argument);
}

TEST_CASE("srnn training error is zero, deleted estimate stays in [0,1]") {
  const SrnnRule rule(1e-4);
  const SrnnUniformDistribution dist(0.4);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset data = sample_of(dist, 15, SeedStream(500 + trial));
    CHECK(resubstitution(rule, data) == 0.0);
    const double del = deleted(rule, data);
    CHECK(del >= 0.0);
    CHECK(del <= 1.0);
  }
}

TEST_CASE("mc risk of the always-+1 classifier equals the negative-label mass") {
  const SrnnRule rule(0.01);
  const SrnnUniformDistribution dist(0.3);
  const Hypothesis fallback = rule.fit(Dataset());
  const McRisk risk = mc_risk(rule, fallback, dist, 30000, SeedStream(9));
  CHECK(std::fabs(risk.value - 0.3) <= 3.0 * risk.se);
}

TEST_CASE("mc risk of zero weights under pure-noise data is E|Z|") {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(2, 1.0);
  const Hypothesis zero(LinearModel{{0.0, 0.0}});
  const McRisk risk = mc_risk(rule, zero, dist, 40000, SeedStream(10));
  const double expected = std::sqrt(2.0 / std::numbers::pi);
  CHECK(std::fabs(risk.value - expected) <= 3.0 * risk.se);
}

TEST_CASE("gap samples: constant rule has zero gaps") {
  const ConstantLossRule rule(0.7);
  const RidgeBallDistribution dist(1, 1.0);
  const auto gaps = gap_samples(rule, dist, 4, 25, 50, SeedStream(11));
  REQUIRE(gaps.size() == 25);
  for (const auto& gap : gaps) {
    CHECK(gap.gap_del == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gap.gap_res == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gap.triple.mc_risk_se == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("gap samples: srnn resubstitution gap equals the measured risk") {
  const SrnnRule rule(1.0 / 625.0);
  const SrnnUniformDistribution dist(0.3);
  const auto gaps = gap_samples(rule, dist, 25, 20, 400, SeedStream(12));
  for (const auto& gap : gaps) {
    CHECK(gap.triple.resubstitution == 0.0);
    CHECK(gap.gap_res == doctest::Approx(gap.triple.mc_risk).epsilon(1e-15));
  }
}

TEST_CASE("gap samples are schedule independent") {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(2, 1.0);
  const auto serial = gap_samples(rule, dist, 8, 30, 200, SeedStream(13), 1);
  const auto threaded = gap_samples(rule, dist, 8, 30, 200, SeedStream(13), 4);
  REQUIRE(serial.size() == threaded.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].gap_del == threaded[r].gap_del);
    CHECK(serial[r].gap_res == threaded[r].gap_res);
    CHECK(serial[r].triple.mc_risk == threaded[r].triple.mc_risk);
  }
}

TEST_CASE("deleted estimate is unbiased for the risk at n-1") {
  // MC mean of R_DEL(S_n) matches the MC mean of the risk of rules trained on
  // n-1 fresh points, within 3 combined standard errors.
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(1, 1.0);
  const int n = 8, reps = 400, test_m = 2000;
  const SeedStream root(14);

  std::vector<double> del_values, risk_values;
  for (int r = 0; r < reps; ++r) {
    const SeedStream rep = root.child(0).child(r);
    Rng rng = rep.rng();
    del_values.push_back(deleted(rule, sample_dataset(dist, n, rng)));

    const SeedStream rep2 = root.child(1).child(r);
    Rng rng2 = rep2.rng();
    const Dataset fresh = sample_dataset(dist, n - 1, rng2);
    risk_values.push_back(
        mc_risk(rule, rule.fit(fresh), dist, test_m, rep2.child(1)).value);
  }
  const double mean_del = mean(del_values);
  const double mean_risk = mean(risk_values);
  const double combined = std::sqrt(stderr_of_mean(del_values) * stderr_of_mean(del_values) +
                                    stderr_of_mean(risk_values) * stderr_of_mean(risk_values));
  CHECK(std::fabs(mean_del - mean_risk) <= 3.0 * combined);
}
