#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "stabletail/harness.hpp"

using namespace stabletail;

namespace {

const char* kCoverageConfig = R"({
  "experiment": "coverage",
  "master_seed": 7,
  "rule": {"type": "ridge", "lambda": 1.0},
  "distribution": {"type": "ridge-uniform-ball", "d": 1, "b_x": 1.0},
  "n": 8,
  "reps": 120,
  "stability_reps": 150,
  "test_m": 400,
  "q_max": 4,
  "delta": 0.1,
  "bound": "deleted"
})";

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("config parsing and diagnostics") {
  const ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  CHECK(cfg.kind == ExperimentKind::coverage);
  CHECK(cfg.master_seed == 7);
  CHECK(cfg.n == 8);
  CHECK(cfg.bound == "deleted");

  // unknown key names the key
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"experiment":"coverage","master_seed":1,"nope":2})"),
                       "config: unknown field 'nope' in top level", std::runtime_error);

  // missing mandatory seed
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"experiment":"coverage"})"),
                       "config: missing field 'master_seed' in top level",
                       std::runtime_error);

  // malformed JSON carries the parser diagnostic (line/byte position)
  try {
    parse_config_text("{\n  \"experiment\": \"coverage\",\n  !bad\n}");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    const std::string message = e.what();
    CHECK(message.find("config:") == 0);
    CHECK(message.find("line") != std::string::npos);
  }

  // out-of-range values name the field
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"experiment":"coverage","master_seed":1,"delta":2.0})"),
      "config: delta must lie in (0,1)", std::runtime_error);
}

TEST_CASE("canonical config excludes execution parameters") {
  ExperimentConfig a = parse_config_text(kCoverageConfig);
  ExperimentConfig b = a;
  b.threads = 8;
  b.out_dir = "/somewhere/else";
  b.format = "csv";
  CHECK(canonical_config_json(a) == canonical_config_json(b));
  CHECK(config_hash(a) == config_hash(b));

  ExperimentConfig c = a;
  c.master_seed = 8;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("coverage run: constant rule never violates") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.rule.type = RuleConfig::Type::constant;
  cfg.rule.loss_value = 0.25;
  cfg.reps = 60;
  cfg.stability_reps = 60;
  const CoverageOutcome outcome = run_coverage(cfg);
  CHECK(outcome.violation_rate == 0.0);
  CHECK(outcome.verdict.status == VerdictStatus::pass);
  CHECK(outcome.bound.radius > 0.0);
}

TEST_CASE("coverage run: forced zero radius is a failing negative control") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.radius_override = 0.0;
  const CoverageOutcome outcome = run_coverage(cfg);
  CHECK(outcome.violation_rate > 0.9);
  CHECK(outcome.verdict.status == VerdictStatus::fail);
}

TEST_CASE("coverage verdict is refused when reps cannot falsify the statement") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.reps = 20;
  cfg.delta = 0.01;  // reps * delta = 0.2 < 5
  const CoverageOutcome outcome = run_coverage(cfg);
  CHECK(outcome.verdict.status == VerdictStatus::inconclusive);
}

TEST_CASE("runs are deterministic and schedule independent") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.reps = 60;
  cfg.stability_reps = 100;
  const RunResult first = run_experiment(cfg);
  const RunResult second = run_experiment(cfg);
  CHECK(first.report_json == second.report_json);

  ExperimentConfig threaded = cfg;
  threaded.threads = 4;
  const RunResult parallel = run_experiment(threaded);
  CHECK(first.report_json == parallel.report_json);
}

TEST_CASE("report json carries the fixed top-level schema") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.rule.type = RuleConfig::Type::constant;
  cfg.rule.loss_value = 0.1;
  cfg.reps = 40;
  cfg.stability_reps = 50;
  const RunResult result = run_experiment(cfg);
  for (const char* key :
       {"\"config\"", "\"config_hash\"", "\"seed\"", "\"results\"", "\"verdicts\"",
        "\"timings\""})
    CHECK(result.report_json.find(key) != std::string::npos);
  CHECK(result.report_json.find("fit_count") != std::string::npos);
  CHECK(result.counters.fit_count > 0);
  CHECK(result.report_json.back() == '\n');
}

TEST_CASE("stability profile run with monotone envelope") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::stability_profile;
  cfg.master_seed = 5;
  cfg.rule.type = RuleConfig::Type::ridge;
  cfg.rule.lambda = 1.0;
  cfg.distribution.type = DistributionConfig::Type::ridge_ball;
  cfg.distribution.d = 1;
  cfg.stability_reps = 120;
  cfg.n_grid = {6, 8, 10};
  cfg.q_grid = {1, 2};
  cfg.estimate_gamma = true;
  cfg.apply_monotone_envelope = true;
  cfg.format = "csv";

  const StabilityProfileOutcome outcome = run_stability_profile(cfg);
  CHECK(outcome.profile.entries.size() == 3 * 2 * 2);
  CHECK(outcome.profile.monotone_envelope_applied);
  for (int q : {1, 2}) {
    double previous = 1e300;
    for (int n : {6, 8, 10}) {
      for (const auto& e : outcome.profile.entries) {
        if (e.kind == StabilityKind::beta && e.q == q && e.n == n) {
          CHECK(e.value <= previous + 1e-15);
          previous = e.value;
        }
      }
    }
  }

  const RunResult result = run_experiment(cfg);
  REQUIRE(result.csv);
  CHECK(result.csv_name == "stability.csv");
  CHECK(result.csv->rfind("kind,q,n,value,stderr,reps,seed\n", 0) == 0);
}

TEST_CASE("srnn demo produces the advertised verdicts quickly") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::srnn_demo;
  cfg.master_seed = 6;
  cfg.rule.type = RuleConfig::Type::srnn;
  cfg.distribution.type = DistributionConfig::Type::srnn_uniform;
  cfg.distribution.eta = 0.3;
  cfg.reps = 80;
  cfg.stability_reps = 300;
  cfg.test_m = 800;
  cfg.n_grid = {10, 20};

  const SrnnDemoOutcome outcome = run_srnn_demo(cfg);
  REQUIRE(outcome.rows.size() == 2);
  for (const auto& row : outcome.rows) {
    CHECK(row.resubstitution_all_zero);
    CHECK(row.dn == doctest::Approx(1.0 / (row.n * row.n)));
  }
  REQUIRE(outcome.verdicts.size() == 4);
  CHECK(outcome.verdicts[0].status == VerdictStatus::pass);  // resubstitution zero
  CHECK(outcome.verdicts[1].status == VerdictStatus::pass);  // risk lower bound
}

TEST_CASE("bound evaluation from supplied inputs") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::bound_eval;
  cfg.master_seed = 1;
  cfg.bound = "uniform-baseline";
  cfg.n = 2;
  cfg.delta = 2.0 * std::exp(-1.0);
  cfg.bound_inputs.values = {{"beta_u", 0.0}, {"M", 1.0}};
  const BoundEvalOutcome outcome = run_bound_eval(cfg);
  CHECK(outcome.report.radius == doctest::Approx(0.5).epsilon(1e-12));

  ExperimentConfig missing = cfg;
  missing.bound_inputs.values = {{"beta_u", 0.0}};
  CHECK_THROWS_AS(run_bound_eval(missing), std::runtime_error);
}

TEST_CASE("ridge csv ingestion infers the covariate bound") {
  const std::string path = temp_path("stabletail_test_ridge.csv");
  {
    std::ofstream out(path);
    out << "x_1,x_2,y\n";
    out << "1.0,0.0,0.5\n";
    out << "0.0,2.0,-0.25\n";
    out << "0.5,0.5,0.125\n";
    out << "0.1,0.1,0.0\n";
  }
  double b_x = 0.0;
  const Dataset data = load_regression_csv(path, &b_x);
  CHECK(data.size() == 4);
  CHECK(b_x == doctest::Approx(2.0));

  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::bound_eval;
  cfg.master_seed = 1;
  cfg.bound = "ridge-closed-form";
  cfg.rule.lambda = 1.0;
  cfg.delta = 0.1;
  cfg.bound_inputs.analytic_gaussian = true;
  cfg.data_csv = path;
  const BoundEvalOutcome outcome = run_bound_eval(cfg);
  REQUIRE(outcome.data_n);
  CHECK(*outcome.data_n == 4);
  CHECK(*outcome.data_b_x == doctest::Approx(2.0));
  CHECK(*outcome.data_resubstitution >= 0.0);
  CHECK(*outcome.data_deleted >= 0.0);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_regression_csv("/nonexistent/file.csv", nullptr),
                  std::runtime_error);
}

TEST_CASE("csv loader rejects malformed tables") {
  const std::string path = temp_path("stabletail_bad.csv");
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n";
  }
  CHECK_THROWS_AS(load_regression_csv(path, nullptr), std::runtime_error);
  {
    std::ofstream out(path);
    out << "x_1,y\n1.0\n";
  }
  CHECK_THROWS_AS(load_regression_csv(path, nullptr), std::runtime_error);
  {
    std::ofstream out(path);
    out << "x_1,y\n1.0,zzz\n";
  }
  CHECK_THROWS_AS(load_regression_csv(path, nullptr), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("write and summarize a report") {
  ExperimentConfig cfg = parse_config_text(kCoverageConfig);
  cfg.rule.type = RuleConfig::Type::constant;
  cfg.rule.loss_value = 0.2;
  cfg.reps = 60;
  cfg.stability_reps = 50;
  cfg.out_dir = temp_path("stabletail_report_dir");
  cfg.format = "csv";

  const RunResult result = run_experiment(cfg);
  CHECK(write_run_result(result) == 0);
  std::string summary;
  CHECK(summarize_report_file(cfg.out_dir + "/report.json", &summary) == 0);
  CHECK(summary.find("coverage") != std::string::npos);
  CHECK(summary.find("[pass]") != std::string::npos);
  CHECK(std::filesystem::exists(cfg.out_dir + "/coverage.csv"));
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("proxy realizations and sandwich verdicts serialize to JSON") {
  ProxySamples proxy;
  proxy.z = 0.5;
  proxy.variants = {0.4, 0.45};
  proxy.proxy_value = 0.0125;
  proxy.kind = ProxyKind::replacement;
  proxy.instantiation = ProxyInstantiation::true_risk;
  proxy.z_mc_variance = 1e-4;
  const std::string proxy_json = proxy_samples_json(proxy);
  CHECK(proxy_json.find("\"kind\":\"replacement\"") != std::string::npos);
  CHECK(proxy_json.find("\"instantiation\":\"true-risk\"") != std::string::npos);
  CHECK(proxy_json.find("\"proxy_value\":0.0125") != std::string::npos);
  CHECK(proxy_json.find("\"z_mc_variance\"") != std::string::npos);

  EfronSteinReport sandwich;
  sandwich.var_z = 0.1;
  sandwich.mean_v = 0.2;
  sandwich.mean_vdel = 0.3;
  sandwich.var_le_v = sandwich.v_le_vdel = sandwich.pass = true;
  const std::string sandwich_json = efron_stein_report_json(sandwich);
  CHECK(sandwich_json.find("\"pass\":true") != std::string::npos);
  CHECK(sandwich_json.find("\"mean_vdel\":0.3") != std::string::npos);
}

TEST_CASE("resubstitution bound dominates the deleted bound on srnn coefficients") {
  // the removal-stability terms shrink with n while the resubstitution bound
  // keeps the gamma contribution, matching the counterexample's behaviour
  const SrnnUniformDistribution dist(0.5);
  const SeedStream root(60);
  double previous_deleted = 1e300;
  for (int n : {20, 40}) {
    const double dn = 1.0 / (static_cast<double>(n) * n);
    const SrnnRule rule(dn);
    const StabilitySweep sweep_n = stability_sweep(rule, dist, n, 500, root.child(n));
    const StabilitySweep sweep_nm1 =
        stability_sweep(rule, dist, n - 1, 500, root.child(n).child(1));

    MomentProfile deleted_profile, resub_profile;
    for (int q = 1; q <= 4; ++q) {
      EnvelopeInputs inputs;
      inputs.beta_4q_nm1 = sweep_nm1.beta_value(4 * q);
      inputs.loss_norms_4q = sweep_n.loss_norms(4.0 * q);
      deleted_profile.m2q[q] =
          envelope_lhs(EnvelopeKind::deleted_estimate, q, n, inputs, false);
      inputs.gamma_4q_n = sweep_n.gamma_value(4 * q);
      inputs.gamma_4q_nm1 = sweep_nm1.gamma_value(4 * q);
      resub_profile.m2q[q] =
          envelope_lhs(EnvelopeKind::resubstitution, q, n, inputs, false);
    }
    const UwFit del_fit = fit_uw(deleted_profile);
    const UwFit res_fit = fit_uw(resub_profile);

    auto del_radius = [&](double a) {
      return deleted_tail_bound(sweep_n.beta_value(1), sweep_nm1.beta_value(2),
                                del_fit.uw.u, del_fit.uw.w, n, 0.05, a)
          .radius;
    };
    auto res_radius = [&](double a) {
      return resubstitution_tail_bound(sweep_n.beta_value(1), sweep_n.gamma_value(1),
                                       sweep_nm1.beta_value(2), res_fit.uw.u,
                                       res_fit.uw.w, n, 0.05, a)
          .radius;
    };
    const double del = optimize_a(del_radius).radius;
    const double res = optimize_a(res_radius).radius;
    CHECK(sweep_n.gamma_value(1) > 3.0 * sweep_n.gamma_se(1));
    CHECK(res >= sweep_n.gamma_value(1));
    CHECK(res > del);
    CHECK(del < previous_deleted);
    previous_deleted = del;
  }
}
