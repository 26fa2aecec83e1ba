#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stabletail/estimators.hpp"
#include "stabletail/moments.hpp"
#include "stabletail/subgamma.hpp"

using namespace stabletail;

namespace {

MomentProfile profile_from(const std::vector<double>& values) {
  MomentProfile profile;
  for (std::size_t q = 0; q < values.size(); ++q)
    profile.m2q[static_cast<int>(q) + 1] = values[q];
  profile.sample_count = 1000;
  return profile;
}

Dataset sample_of(const Distribution& dist, int n, const SeedStream& stream) {
  Rng rng = stream.rng();
  return sample_dataset(dist, static_cast<std::size_t>(n), rng);
}

bool feasible(const MomentProfile& profile, const SubGammaUW& uw) {
  for (const auto& [q, m] : profile.m2q) {
    const double dq = static_cast<double>(q);
    if (std::max(std::sqrt(dq * uw.u), dq * uw.w) < m * (1.0 - 1e-9)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("uw conversion constants") {
  const SubGammaVC a = uw_to_vc({1.0, 0.0});
  CHECK(a.v == doctest::Approx(4.4).epsilon(1e-15));
  CHECK(a.c == doctest::Approx(0.0));

  const SubGammaVC b = uw_to_vc({0.0, 1.0});
  CHECK(b.v == doctest::Approx(2.12).epsilon(1e-15));
  CHECK(b.c == doctest::Approx(1.46).epsilon(1e-15));

  const SubGammaVC zero = uw_to_vc({0.0, 0.0});
  CHECK(zero.v == 0.0);
  CHECK(zero.c == 0.0);
}

TEST_CASE("envelope fit prefers an exactly matching branch") {
  // m_{2q} = sqrt(q): the u-branch matches exactly at u = 1
  std::vector<double> root_q;
  for (int q = 1; q <= 8; ++q) root_q.push_back(std::sqrt(static_cast<double>(q)));
  const UwFit u_fit = fit_uw(profile_from(root_q));
  CHECK(u_fit.uw.u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u_fit.uw.w == 0.0);
  CHECK(u_fit.diagnostics.exact_u_match);

  // m_{2q} = q: the w-branch matches exactly at w = 1
  std::vector<double> linear_q;
  for (int q = 1; q <= 8; ++q) linear_q.push_back(static_cast<double>(q));
  const UwFit w_fit = fit_uw(profile_from(linear_q));
  CHECK(w_fit.uw.u == 0.0);
  CHECK(w_fit.uw.w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w_fit.diagnostics.exact_w_match);

  // all-zero profile
  const UwFit zero_fit = fit_uw(profile_from({0.0, 0.0, 0.0}));
  CHECK(zero_fit.uw.u == 0.0);
  CHECK(zero_fit.uw.w == 0.0);

  MomentProfile empty;
  CHECK_THROWS_AS(fit_uw(empty), std::invalid_argument);
}

TEST_CASE("envelope fit output is always feasible") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values;
    double running = 0.1 + rng.next_unit();
    const int q_max = 3 + static_cast<int>(rng.next_u64() % 6);
    for (int q = 1; q <= q_max; ++q) {
      running += rng.next_unit() * (1.0 + 0.3 * q);  // nondecreasing in q
      values.push_back(running);
    }
    const MomentProfile profile = profile_from(values);
    const UwFit fit = fit_uw(profile);
    CHECK(feasible(profile, fit.uw));
    for (const auto& [q, slack] : fit.diagnostics.slack) CHECK(slack >= -1e-9);
  }
}

TEST_CASE("tail check: degenerate samples never exceed") {
  std::vector<double> zeros(500, 0.0);
  const std::vector<double> grid{0.5, 1.0, 2.0};
  for (const auto& point : tail_violation_rate(zeros, {1.0, 0.0}, grid)) {
    CHECK(point.exceedance == 0.0);
    CHECK(!point.violated);
  }
}

TEST_CASE("tail check: standard normal under (v=1, c=0)") {
  Rng rng(22);
  std::vector<double> samples(40000);
  for (auto& x : samples) x = rng.next_normal();
  const std::vector<double> grid{2.0};
  const auto points = tail_violation_rate(samples, {1.0, 0.0}, grid);
  REQUIRE(points.size() == 1);
  // radius = sqrt(2 v t) = 2: P(Z > 2) ~ 0.0228 < e^{-2} ~ 0.1353
  CHECK(points[0].radius == doctest::Approx(2.0));
  CHECK(points[0].exceedance <= points[0].target + 3.0 * points[0].se);
  CHECK(!points[0].violated);
}

TEST_CASE("tail check flags constructed violations") {
  // half the mass sits just beyond the t = 1 radius
  const SubGammaVC vc{1.0, 0.5};
  const double boundary = std::sqrt(2.0 * vc.v) + vc.c;
  std::vector<double> samples;
  for (int i = 0; i < 200; ++i) samples.push_back(i % 2 == 0 ? boundary + 1.0 : 0.0);
  const std::vector<double> grid{1.0};
  const auto points = tail_violation_rate(samples, vc, grid);
  CHECK(points[0].exceedance == doctest::Approx(0.5));
  CHECK(points[0].exceedance > points[0].target);
  CHECK(points[0].violated);
}

TEST_CASE("forward moment bound shape") {
  CHECK(forward_moment_bound(4, {1.0, 0.0}) == doctest::Approx(20.0));
  CHECK(forward_moment_bound(4, {0.0, 1.0}) == doctest::Approx(40.0));

  CHECK(forward_moment_bound_tight(4, {1.0, 0.0}) == doctest::Approx(std::sqrt(67.2)));
  CHECK(forward_moment_bound_tight(4, {0.0, 1.0}) == doctest::Approx(38.4));
  // the sharp constants never exceed the rounded ones
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const SubGammaVC vc{rng.next_unit() * 4.0, rng.next_unit() * 2.0};
    for (int q = 1; q <= 8; ++q)
      CHECK(forward_moment_bound_tight(q, vc) <= forward_moment_bound(q, vc) + 1e-12);
  }
}

TEST_CASE("removal proxy of the leave-one-out statistic: constant rule") {
  const double c = 0.6;
  const ConstantLossRule rule(c);
  const RidgeBallDistribution dist(1, 1.0);
  const int n = 5;
  const Dataset data = sample_of(dist, n, SeedStream(30));
  const ProxySamples proxy = vdel_for_deleted(rule, data);
  // Z = c, Z_{-i} = (n-1) c / n: proxy = n (c/n)^2 = c^2 / n
  CHECK(proxy.z == doctest::Approx(c).epsilon(1e-14));
  for (double variant : proxy.variants)
    CHECK(variant == doctest::Approx((n - 1) * c / n).epsilon(1e-14));
  CHECK(proxy.proxy_value == doctest::Approx(c * c / n).epsilon(1e-12));

  const ConstantLossRule zero(0.0);
  CHECK(vdel_for_deleted(zero, data).proxy_value == doctest::Approx(0.0));
}

TEST_CASE("removal proxy matches a brute-force recomputation on ridge") {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(2, 1.0);
  const int n = 4;
  const Dataset data = sample_of(dist, n, SeedStream(31));
  const ProxySamples proxy = vdel_for_deleted(rule, data);

  // independent recomputation straight from raw losses over all (i, j)
  const double z = deleted(rule, data);
  CHECK(proxy.z == doctest::Approx(z).epsilon(1e-12));
  double brute_proxy = 0.0;
  for (int i = 0; i < n; ++i) {
    double variant = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Dataset both_removed = data.remove2(i, j);
      const Hypothesis h = rule.fit(both_removed);
      variant += rule.loss(h, data[j]);
    }
    variant /= n;
    CHECK(proxy.variants[i] == doctest::Approx(variant).epsilon(1e-10));
    brute_proxy += (z - variant) * (z - variant);
  }
  CHECK(proxy.proxy_value == doctest::Approx(brute_proxy).epsilon(1e-10));
}

TEST_CASE("risk proxy: constant rule gives exactly zero") {
  const ConstantLossRule rule(0.3);
  const RidgeBallDistribution dist(1, 1.0);
  const Dataset data = sample_of(dist, 5, SeedStream(32));
  const ProxySamples proxy = vdel_for_risk(rule, data, dist, 200, SeedStream(33));
  CHECK(proxy.proxy_value == doctest::Approx(0.0));
  CHECK(proxy.z == doctest::Approx(0.3));
}

TEST_CASE("risk proxy: shared test set agrees with independent test sets") {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(1, 1.0);
  const int n = 6, reps = 300, m = 800;
  const SeedStream root(34);

  std::vector<double> shared_values, independent_values;
  for (int r = 0; r < reps; ++r) {
    const SeedStream rep = root.child(r);
    const Dataset data = sample_of(dist, n, rep.child(0));
    shared_values.push_back(
        vdel_for_risk(rule, data, dist, m, rep.child(1)).proxy_value);

    // per-variant independent pools
    const double z = mc_risk(rule, rule.fit(data), dist, m, rep.child(2)).value;
    double proxy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double variant =
          mc_risk(rule, rule.fit(data.remove(i)), dist, m, rep.child(3).child(i)).value;
      proxy += (z - variant) * (z - variant);
    }
    independent_values.push_back(proxy);
  }
  const double combined =
      std::sqrt(stderr_of_mean(shared_values) * stderr_of_mean(shared_values) +
                stderr_of_mean(independent_values) * stderr_of_mean(independent_values));
  // the independent-pool estimator is biased upward by the MC variance of the
  // risk differences, which the shared pool suppresses; 3 stderr still covers
  // the agreement at this m because the bias term is O(1/m)
  CHECK(std::fabs(mean(shared_values) - mean(independent_values)) <=
        3.0 * combined + 12.0 * static_cast<double>(n) / m);

  // srnn risk proxies are nonnegative by construction
  const SrnnRule srnn(0.01);
  const SrnnUniformDistribution labels(0.4);
  const Dataset cls_data = sample_of(labels, 8, SeedStream(35));
  CHECK(vdel_for_risk(srnn, cls_data, labels, 200, SeedStream(36)).proxy_value >= 0.0);
}

TEST_CASE("replacement proxy basics") {
  const RidgeBallDistribution dist(1, 1.0);
  const Dataset data = sample_of(dist, 5, SeedStream(37));

  const ConstantLossRule constant(0.5);
  std::vector<Example> fresh;
  {
    Rng rng = SeedStream(38).rng();
    for (int i = 0; i < 5; ++i) fresh.push_back(dist.sample(rng));
  }
  CHECK(v_replacement(constant, data, fresh, ProxyInstantiation::deleted_estimate)
            .proxy_value == doctest::Approx(0.0));

  // identity replacement: every Z_i equals Z
  const RidgeRule ridge(1.0);
  std::vector<Example> same(data.examples());
  const ProxySamples identity =
      v_replacement(ridge, data, same, ProxyInstantiation::deleted_estimate);
  CHECK(identity.proxy_value == doctest::Approx(0.0).epsilon(1e-18));

  std::vector<Example> short_list(fresh.begin(), fresh.begin() + 3);
  CHECK_THROWS_AS(
      v_replacement(ridge, data, short_list, ProxyInstantiation::deleted_estimate),
      std::invalid_argument);
  CHECK_THROWS_AS(v_replacement(ridge, data, fresh, ProxyInstantiation::true_risk),
                  std::invalid_argument);  // missing dist/m/stream
}

TEST_CASE("replacement proxy halves into the conditional-variance estimate") {
  ProxySamples removal;
  removal.kind = ProxyKind::removal;
  removal.proxy_value = 1.0;
  CHECK(efron_stein_v_estimate(removal) == 1.0);

  ProxySamples replacement;
  replacement.kind = ProxyKind::replacement;
  replacement.proxy_value = 1.0;
  CHECK(efron_stein_v_estimate(replacement) == 0.5);
}

TEST_CASE("sandwich: conditional-variance proxy below the removal proxy on ridge") {
  const RidgeRule rule(1.0);
  const RidgeBallDistribution dist(1, 1.0);
  const int n = 6, reps = 500;
  const SeedStream root(39);

  std::vector<double> v_estimates, vdel_values;
  for (int r = 0; r < reps; ++r) {
    const SeedStream rep = root.child(r);
    const Dataset data = sample_of(dist, n, rep.child(0));
    std::vector<Example> fresh;
    Rng rng = rep.child(1).rng();
    for (int i = 0; i < n; ++i) fresh.push_back(dist.sample(rng));
    v_estimates.push_back(efron_stein_v_estimate(
        v_replacement(rule, data, fresh, ProxyInstantiation::deleted_estimate)));
    vdel_values.push_back(vdel_for_deleted(rule, data).proxy_value);
  }
  const double combined =
      std::sqrt(stderr_of_mean(v_estimates) * stderr_of_mean(v_estimates) +
                stderr_of_mean(vdel_values) * stderr_of_mean(vdel_values));
  CHECK(mean(v_estimates) <= mean(vdel_values) + 3.0 * combined);
}

TEST_CASE("proxy moment bounds evaluate exactly") {
  const std::vector<double> ones{1.0, 1.0};
  CHECK(proxy_moment_rhs_deleted(1, 2, ones, 0.0, false) == doctest::Approx(1.0));
  CHECK(proxy_moment_rhs_deleted(1, 2, ones, 0.0, true) == doctest::Approx(4.0));
  const std::vector<double> zeros3{0.0, 0.0, 0.0};
  CHECK(proxy_moment_rhs_deleted(1, 3, zeros3, 1.0, false) == doctest::Approx(6.0));
  CHECK(proxy_moment_rhs_deleted(1, 3, zeros3, 1.0, true) == doctest::Approx(24.0));
  CHECK(proxy_moment_rhs_deleted(2, 4, {}, 0.0, false) == doctest::Approx(0.0));

  CHECK(proxy_moment_rhs_risk(1, 10, 0.0, false) == doctest::Approx(0.0));
  CHECK(proxy_moment_rhs_risk(1, 10, 0.1, false) == doctest::Approx(0.1));
  CHECK(proxy_moment_rhs_risk(1, 10, 0.1, true) == doctest::Approx(0.4));
}

TEST_CASE("moment-envelope left-hand sides evaluate exactly") {
  EnvelopeInputs zeros;
  zeros.loss_norms_4q = {0.0, 0.0};
  CHECK(envelope_lhs(EnvelopeKind::deleted_estimate, 1, 2, zeros, false) ==
        doctest::Approx(0.0));

  EnvelopeInputs beta_only;
  beta_only.beta_4q_nm1 = 1.0;
  beta_only.loss_norms_4q = {0.0, 0.0};
  CHECK(envelope_lhs(EnvelopeKind::deleted_estimate, 1, 2, beta_only, false) ==
        doctest::Approx(4.0));
  CHECK(envelope_lhs(EnvelopeKind::deleted_estimate, 1, 2, beta_only, true) ==
        doctest::Approx(16.0));

  EnvelopeInputs norms_only;
  norms_only.loss_norms_4q = {1.0, 1.0};
  CHECK(envelope_lhs(EnvelopeKind::resubstitution, 1, 2, norms_only, false) ==
        doctest::Approx(1.0));

  // resubstitution kind counts the gamma terms
  EnvelopeInputs gammas;
  gammas.gamma_4q_n = 1.0;
  gammas.loss_norms_4q = {0.0, 0.0};
  CHECK(envelope_lhs(EnvelopeKind::resubstitution, 1, 2, gammas, false) ==
        doctest::Approx(6.0 * 2.0 + 1.0));
}

TEST_CASE("efron-stein check on hand-built inputs") {
  std::vector<double> z(50, 1.0), v(50, 0.0), vdel(50, 0.0);
  const EfronSteinReport degenerate = efron_stein_check(z, v, vdel);
  CHECK(degenerate.pass);
  CHECK(degenerate.var_z == doctest::Approx(0.0));

  // adversarial: v_del half of v must be flagged
  Rng rng(40);
  std::vector<double> z2, v2, vdel2;
  for (int i = 0; i < 400; ++i) {
    z2.push_back(rng.next_normal());
    const double value = 1.0 + 0.01 * rng.next_normal();
    v2.push_back(3.0 * value);
    vdel2.push_back(1.5 * value);
  }
  const EfronSteinReport flagged = efron_stein_check(z2, v2, vdel2);
  CHECK(!flagged.v_le_vdel);
  CHECK(!flagged.pass);

  CHECK_THROWS_AS(efron_stein_check(std::vector<double>(5, 0.0), v, vdel),
                  std::invalid_argument);
}

TEST_CASE("efron-stein sandwich for the mean of uniforms") {
  // Z = mean of n uniforms; removal variants are scaled partial means and the
  // replacement variants substitute a fresh uniform. Var(Z) = 1/(12 n).
  const int n = 10, reps = 2000;
  Rng rng(41);
  std::vector<double> z_values, v_estimates, vdel_values;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> xs(n), fresh(n);
    for (auto& x : xs) x = rng.next_unit();
    for (auto& x : fresh) x = rng.next_unit();
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double z = sum / n;

    double vdel = 0.0, vrep = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z_minus_i = (sum - xs[i]) / (n - 1);
      vdel += (z - z_minus_i) * (z - z_minus_i);
      const double z_i = (sum - xs[i] + fresh[i]) / n;
      vrep += (z - z_i) * (z - z_i);
    }
    z_values.push_back(z);
    vdel_values.push_back(vdel);
    v_estimates.push_back(0.5 * vrep);
  }
  const EfronSteinReport report = efron_stein_check(z_values, v_estimates, vdel_values);
  CHECK(report.pass);
  CHECK(std::fabs(report.var_z - 1.0 / (12.0 * n)) <= 4.0 * report.var_z_se);
}
