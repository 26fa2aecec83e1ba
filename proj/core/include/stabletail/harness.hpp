#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stabletail/bounds.hpp"
#include "stabletail/estimators.hpp"
#include "stabletail/stability.hpp"
#include "stabletail/subgamma.hpp"

namespace stabletail {

enum class ExperimentKind { coverage, srnn_demo, ridge_demo, stability_profile, bound_eval };

enum class APolicyMode { fixed, optimize };

struct APolicy {
  APolicyMode mode = APolicyMode::optimize;
  double value = 1.0;  // used when mode == fixed
};

struct DnSchedule {
  enum class Type { inverse_square, fixed };
  Type type = Type::inverse_square;
  double coefficient = 1.0;  // d_n = coefficient / n^2
  double fixed_value = 0.0;

  double at(int n) const;
};

struct RuleConfig {
  enum class Type { ridge, srnn, constant, mean };
  Type type = Type::ridge;
  double lambda = 1.0;      // ridge
  DnSchedule dn;            // srnn
  double loss_value = 0.0;  // constant
};

struct DistributionConfig {
  enum class Type { ridge_ball, srnn_uniform };
  Type type = Type::ridge_ball;
  int d = 1;
  double b_x = 1.0;
  std::vector<double> signal;  // empty = pure noise
  double eta = 0.5;
};

/// Direct formula inputs for the bound-eval experiment (no Monte Carlo).
struct BoundInputs {
  std::map<std::string, double> values;
  bool analytic_gaussian = false;  // ridge-closed-form: take (mu, u_y, w_y) from the oracle
};

struct ExperimentConfig {
  int version = 1;
  ExperimentKind kind = ExperimentKind::coverage;
  std::uint64_t master_seed = 0;

  RuleConfig rule;
  DistributionConfig distribution;

  int n = 20;
  int reps = 500;
  int stability_reps = 2000;
  int test_m = 20000;
  int proxy_m = 4000;  // shared-test-set size for risk proxies
  int q_max = 8;
  double delta = 0.05;
  APolicy a_policy;
  std::string bound = "deleted";  // deleted | resubstitution | uniform-baseline |
                                  // ridge-closed-form | deleted-simplified | efron-stein
  std::optional<bool> unbounded_loss;  // default: from the rule's loss range
  std::optional<double> beta_u;        // uniform-baseline input (never estimated)
  std::optional<double> loss_upper;    // uniform-baseline input M
  std::optional<double> radius_override;  // negative-control hook for coverage
  BoundInputs bound_inputs;               // bound-eval

  std::vector<int> n_grid;  // srnn-demo / stability-profile / ridge beta table
  std::vector<int> q_grid;  // stability-profile / ridge beta table
  bool estimate_gamma = false;
  bool apply_monotone_envelope = false;

  std::string data_csv;  // optional ridge dataset for bound-eval

  // Execution parameters; excluded from the canonical config and its hash.
  int threads = 1;
  std::string out_dir = ".";
  std::string format = "json";
};

/// Parses and validates a config; error messages carry the offending field
/// (or the parser's line/byte diagnostic for malformed JSON).
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical JSON (sorted keys, execution parameters stripped) and its
/// FNV-1a 64-bit hash; both stable across runs and platforms.
std::string canonical_config_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

enum class VerdictStatus { pass, fail, inconclusive };

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::pass;
  std::string detail;
};

struct StabilityInputsRecord {
  double beta1_n = 0.0, beta1_se = 0.0;
  double beta2_nm1 = 0.0, beta2_se = 0.0;
  double gamma1_n = 0.0, gamma1_se = 0.0;
  SubGammaUW uw;
  UwFitDiagnostics uw_diagnostics;
  std::map<int, double> envelope_lhs_profile;
  bool replacement_proxy = false;
  std::string envelope_source;  // "estimated" | "analytic-gaussian" | "supplied"
};

struct CoverageOutcome {
  BoundReport bound;
  StabilityInputsRecord stability;
  std::vector<GapSample> gaps;
  std::vector<bool> violated;
  double violation_rate = 0.0;
  double rate_se = 0.0;
  double target = 0.0;
  Verdict verdict;
};

struct SrnnDemoRow {
  int n = 0;
  double dn = 0.0;
  bool resubstitution_all_zero = true;
  double max_abs_resubstitution = 0.0;
  double mean_risk = 0.0, mean_risk_se = 0.0;
  double risk_lower_bound = 0.0;  // eta - 2 n d_n
  double beta1 = 0.0, beta1_se = 0.0;
  double median_gap_del = 0.0;
};

struct SrnnDemoOutcome {
  double eta = 0.0;
  std::vector<SrnnDemoRow> rows;
  std::vector<Verdict> verdicts;
};

struct RidgeBetaTableRow {
  int q = 0;
  int n = 0;
  double mc_value = 0.0, mc_se = 0.0;
  double closed_form = 0.0;
  bool within_bound = false;  // mc <= closed form + 3 se
};

struct RidgeDemoOutcome {
  double mu = 0.0, u_y = 0.0, w_y = 0.0;
  double kappa = 0.0, kappa_hat = 0.0;
  std::string moment_source;  // "analytic-gaussian" | "estimated"
  CoverageOutcome coverage;
  std::vector<RidgeBetaTableRow> beta_table;
  std::vector<Verdict> verdicts;
};

struct StabilityProfileOutcome {
  StabilityProfile profile;
};

struct BoundEvalOutcome {
  BoundReport report;
  // populated when a CSV dataset was supplied
  std::optional<double> data_resubstitution;
  std::optional<double> data_deleted;
  std::optional<double> data_b_x;
  std::optional<int> data_n;
};

/// Deterministic work counters standing in for wall-clock timings, so that
/// reports stay byte-identical across repeated runs and thread counts. The
/// README documents the cost model they feed.
struct WorkCounters {
  std::uint64_t fit_count = 0;
  std::uint64_t loss_eval_count = 0;
  std::uint64_t sample_count = 0;
};

struct RunResult {
  ExperimentConfig config;
  std::string report_json;          // full report, LF newlines
  std::optional<std::string> csv;   // coverage or stability table when format == csv
  std::string csv_name;
  std::vector<Verdict> verdicts;
  WorkCounters counters;
};

CoverageOutcome run_coverage(const ExperimentConfig& config, WorkCounters* counters = nullptr);
SrnnDemoOutcome run_srnn_demo(const ExperimentConfig& config, WorkCounters* counters = nullptr);
RidgeDemoOutcome run_ridge_demo(const ExperimentConfig& config, WorkCounters* counters = nullptr);
StabilityProfileOutcome run_stability_profile(const ExperimentConfig& config,
                                              WorkCounters* counters = nullptr);
BoundEvalOutcome run_bound_eval(const ExperimentConfig& config, WorkCounters* counters = nullptr);

/// Runs the configured experiment and renders the report (and CSV table when
/// requested). Does not touch the filesystem.
RunResult run_experiment(const ExperimentConfig& config);

/// Writes report.json (and the CSV table when present) under config.out_dir.
/// Returns the exit code contract of the CLI: 0 all verdicts pass, 2 any
/// verdict failed or inconclusive.
int write_run_result(const RunResult& result);

/// Parses a report written by write_run_result and summarizes its verdicts.
/// Returns the same exit-code contract.
int summarize_report_file(const std::string& path, std::string* summary);

/// Regression CSV loader (header x_1,...,x_d,y); infers the covariate norm
/// bound as the maximum row norm.
Dataset load_regression_csv(const std::string& path, double* b_x_out);

std::unique_ptr<LearningRule> make_rule(const RuleConfig& rule, int n);
std::unique_ptr<Distribution> make_distribution(const DistributionConfig& dist);

/// CSV with header rep,gap_del,gap_res,radius,violated (LF newlines).
std::string coverage_csv(const CoverageOutcome& outcome);

/// JSON forms of one variance-proxy realization and of a sandwich verdict,
/// for tooling that embeds proxy studies in reports.
std::string proxy_samples_json(const ProxySamples& proxy);
std::string efron_stein_report_json(const EfronSteinReport& report);

}  // namespace stabletail
