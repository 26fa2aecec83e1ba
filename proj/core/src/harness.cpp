#include "stabletail/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stabletail/parallel.hpp"

namespace stabletail {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// work counters

struct AtomicCounters {
  std::atomic<std::uint64_t> fits{0};
  std::atomic<std::uint64_t> losses{0};
  std::atomic<std::uint64_t> samples{0};

  WorkCounters snapshot() const {
    return {fits.load(), losses.load(), samples.load()};
  }
};

class CountingRule final : public LearningRule {
 public:
  CountingRule(const LearningRule& inner, AtomicCounters& counters)
      : inner_(inner), counters_(counters) {}

  Hypothesis fit(const Dataset& data) const override {
    counters_.fits.fetch_add(1, std::memory_order_relaxed);
    return inner_.fit(data);
  }
  double loss(const Hypothesis& h, const Example& e) const override {
    counters_.losses.fetch_add(1, std::memory_order_relaxed);
    return inner_.loss(h, e);
  }
  bool symmetric() const override { return inner_.symmetric(); }
  LossRange loss_range() const override { return inner_.loss_range(); }
  std::string name() const override { return inner_.name(); }

 private:
  const LearningRule& inner_;
  AtomicCounters& counters_;
};

class CountingDistribution final : public Distribution {
 public:
  CountingDistribution(const Distribution& inner, AtomicCounters& counters)
      : inner_(inner), counters_(counters) {}

  Example sample(Rng& rng) const override {
    counters_.samples.fetch_add(1, std::memory_order_relaxed);
    return inner_.sample(rng);
  }
  std::string descriptor() const override { return inner_.descriptor(); }

 private:
  const Distribution& inner_;
  AtomicCounters& counters_;
};

void merge_counters(const AtomicCounters& from, WorkCounters* to) {
  if (!to) return;
  const WorkCounters snap = from.snapshot();
  to->fit_count += snap.fit_count;
  to->loss_eval_count += snap.loss_eval_count;
  to->sample_count += snap.sample_count;
}

// ---------------------------------------------------------------------------
// config parsing

[[noreturn]] void config_error(const std::string& message) {
  throw std::runtime_error("config: " + message);
}

void check_known_keys(const json& object, const char* where,
                      std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    (void)value;
    bool known = false;
    for (const char* name : allowed)
      if (key == name) known = true;
    if (!known) config_error(std::string("unknown field '") + key + "' in " + where);
  }
}

template <typename T>
T require_field(const json& object, const char* name, const char* where) {
  if (!object.contains(name))
    config_error(std::string("missing field '") + name + "' in " + where);
  try {
    return object.at(name).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("field '") + name + "' in " + where + " has the wrong type");
  }
}

template <typename T>
T optional_field(const json& object, const char* name, const char* where, T fallback) {
  if (!object.contains(name)) return fallback;
  try {
    return object.at(name).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("field '") + name + "' in " + where + " has the wrong type");
  }
}

ExperimentKind parse_kind(const std::string& text) {
  if (text == "coverage") return ExperimentKind::coverage;
  if (text == "srnn-demo") return ExperimentKind::srnn_demo;
  if (text == "ridge-demo") return ExperimentKind::ridge_demo;
  if (text == "stability-profile") return ExperimentKind::stability_profile;
  if (text == "bound-eval") return ExperimentKind::bound_eval;
  config_error("unknown experiment '" + text + "'");
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::coverage: return "coverage";
    case ExperimentKind::srnn_demo: return "srnn-demo";
    case ExperimentKind::ridge_demo: return "ridge-demo";
    case ExperimentKind::stability_profile: return "stability-profile";
    case ExperimentKind::bound_eval: return "bound-eval";
  }
  return "?";
}

RuleConfig parse_rule(const json& object) {
  check_known_keys(object, "rule", {"type", "lambda", "loss_value", "dn_schedule"});
  RuleConfig rule;
  const std::string type = require_field<std::string>(object, "type", "rule");
  if (type == "ridge") {
    rule.type = RuleConfig::Type::ridge;
    rule.lambda = optional_field<double>(object, "lambda", "rule", 1.0);
    if (!(rule.lambda > 0.0)) config_error("rule.lambda must be positive");
  } else if (type == "srnn") {
    rule.type = RuleConfig::Type::srnn;
    if (object.contains("dn_schedule")) {
      const json& schedule = object.at("dn_schedule");
      check_known_keys(schedule, "rule.dn_schedule", {"type", "coefficient", "value"});
      const std::string stype =
          require_field<std::string>(schedule, "type", "rule.dn_schedule");
      if (stype == "inverse-square") {
        rule.dn.type = DnSchedule::Type::inverse_square;
        rule.dn.coefficient =
            optional_field<double>(schedule, "coefficient", "rule.dn_schedule", 1.0);
      } else if (stype == "fixed") {
        rule.dn.type = DnSchedule::Type::fixed;
        rule.dn.fixed_value = require_field<double>(schedule, "value", "rule.dn_schedule");
      } else {
        config_error("rule.dn_schedule.type must be 'inverse-square' or 'fixed'");
      }
    }
  } else if (type == "constant") {
    rule.type = RuleConfig::Type::constant;
    rule.loss_value = optional_field<double>(object, "loss_value", "rule", 0.0);
    if (rule.loss_value < 0.0) config_error("rule.loss_value must be nonnegative");
  } else if (type == "mean") {
    rule.type = RuleConfig::Type::mean;
  } else {
    config_error("unknown rule type '" + type + "'");
  }
  return rule;
}

DistributionConfig parse_distribution(const json& object) {
  check_known_keys(object, "distribution", {"type", "d", "b_x", "signal", "eta"});
  DistributionConfig dist;
  const std::string type = require_field<std::string>(object, "type", "distribution");
  if (type == "ridge-uniform-ball") {
    dist.type = DistributionConfig::Type::ridge_ball;
    dist.d = optional_field<int>(object, "d", "distribution", 1);
    dist.b_x = optional_field<double>(object, "b_x", "distribution", 1.0);
    dist.signal =
        optional_field<std::vector<double>>(object, "signal", "distribution", {});
    if (dist.d < 1) config_error("distribution.d must be >= 1");
    if (!(dist.b_x > 0.0)) config_error("distribution.b_x must be positive");
  } else if (type == "srnn-uniform") {
    dist.type = DistributionConfig::Type::srnn_uniform;
    dist.eta = require_field<double>(object, "eta", "distribution");
    if (!(dist.eta > 0.0 && dist.eta < 1.0))
      config_error("distribution.eta must lie in (0,1)");
  } else {
    config_error("unknown distribution type '" + type + "'");
  }
  return dist;
}

ExperimentConfig parse_config(const json& root, bool require_seed) {
  if (!root.is_object()) config_error("top level must be an object");
  check_known_keys(root, "top level",
                   {"version", "experiment", "master_seed", "rule", "distribution", "n",
                    "reps", "stability_reps", "test_m", "proxy_m", "q_max", "delta",
                    "a_policy", "bound", "unbounded_loss", "beta_u", "loss_upper",
                    "radius_override", "inputs", "analytic_gaussian", "n_grid", "q_grid",
                    "estimate_gamma", "monotone_envelope", "data_csv", "threads", "out",
                    "format"});

  ExperimentConfig cfg;
  cfg.version = optional_field<int>(root, "version", "top level", 1);
  if (cfg.version != 1) config_error("unsupported config version");
  cfg.kind = parse_kind(require_field<std::string>(root, "experiment", "top level"));
  if (require_seed && !root.contains("master_seed"))
    config_error("missing field 'master_seed' in top level");
  cfg.master_seed = optional_field<std::uint64_t>(root, "master_seed", "top level", 0);

  if (root.contains("rule")) cfg.rule = parse_rule(root.at("rule"));
  if (root.contains("distribution"))
    cfg.distribution = parse_distribution(root.at("distribution"));

  cfg.n = optional_field<int>(root, "n", "top level", cfg.n);
  cfg.reps = optional_field<int>(root, "reps", "top level", cfg.reps);
  cfg.stability_reps =
      optional_field<int>(root, "stability_reps", "top level", cfg.stability_reps);
  cfg.test_m = optional_field<int>(root, "test_m", "top level", cfg.test_m);
  cfg.proxy_m = optional_field<int>(root, "proxy_m", "top level", cfg.proxy_m);
  cfg.q_max = optional_field<int>(root, "q_max", "top level", cfg.q_max);
  cfg.delta = optional_field<double>(root, "delta", "top level", cfg.delta);
  if (cfg.n < 2) config_error("n must be >= 2");
  if (cfg.reps < 1) config_error("reps must be >= 1");
  if (cfg.stability_reps < 2) config_error("stability_reps must be >= 2");
  if (cfg.test_m < 1) config_error("test_m must be >= 1");
  if (cfg.proxy_m < 1) config_error("proxy_m must be >= 1");
  if (cfg.q_max < 1) config_error("q_max must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) config_error("delta must lie in (0,1)");

  if (root.contains("a_policy")) {
    const json& policy = root.at("a_policy");
    check_known_keys(policy, "a_policy", {"mode", "value"});
    const std::string mode = require_field<std::string>(policy, "mode", "a_policy");
    if (mode == "fixed") {
      cfg.a_policy.mode = APolicyMode::fixed;
      cfg.a_policy.value = require_field<double>(policy, "value", "a_policy");
      if (!(cfg.a_policy.value > 0.0)) config_error("a_policy.value must be positive");
    } else if (mode == "optimize") {
      cfg.a_policy.mode = APolicyMode::optimize;
    } else {
      config_error("a_policy.mode must be 'fixed' or 'optimize'");
    }
  }

  cfg.bound = optional_field<std::string>(root, "bound", "top level", cfg.bound);
  if (root.contains("unbounded_loss"))
    cfg.unbounded_loss = require_field<bool>(root, "unbounded_loss", "top level");
  if (root.contains("beta_u"))
    cfg.beta_u = require_field<double>(root, "beta_u", "top level");
  if (root.contains("loss_upper"))
    cfg.loss_upper = require_field<double>(root, "loss_upper", "top level");
  if (root.contains("radius_override"))
    cfg.radius_override = require_field<double>(root, "radius_override", "top level");
  if (root.contains("inputs")) {
    const json& inputs = root.at("inputs");
    if (!inputs.is_object()) config_error("inputs must be an object");
    for (const auto& [key, value] : inputs.items()) {
      if (!value.is_number()) config_error("inputs." + key + " must be a number");
      cfg.bound_inputs.values[key] = value.get<double>();
    }
  }
  cfg.bound_inputs.analytic_gaussian =
      optional_field<bool>(root, "analytic_gaussian", "top level", false);

  cfg.n_grid = optional_field<std::vector<int>>(root, "n_grid", "top level", {});
  cfg.q_grid = optional_field<std::vector<int>>(root, "q_grid", "top level", {});
  cfg.estimate_gamma = optional_field<bool>(root, "estimate_gamma", "top level", false);
  cfg.apply_monotone_envelope =
      optional_field<bool>(root, "monotone_envelope", "top level", false);
  cfg.data_csv = optional_field<std::string>(root, "data_csv", "top level", "");

  cfg.threads = optional_field<int>(root, "threads", "top level", 1);
  if (cfg.threads < 1) config_error("threads must be >= 1");
  cfg.out_dir = optional_field<std::string>(root, "out", "top level", ".");
  cfg.format = optional_field<std::string>(root, "format", "top level", "json");
  if (cfg.format != "json" && cfg.format != "csv")
    config_error("format must be 'json' or 'csv'");
  return cfg;
}

json rule_json(const RuleConfig& rule) {
  json out;
  switch (rule.type) {
    case RuleConfig::Type::ridge:
      out["type"] = "ridge";
      out["lambda"] = rule.lambda;
      break;
    case RuleConfig::Type::srnn: {
      out["type"] = "srnn";
      json schedule;
      if (rule.dn.type == DnSchedule::Type::inverse_square) {
        schedule["type"] = "inverse-square";
        schedule["coefficient"] = rule.dn.coefficient;
      } else {
        schedule["type"] = "fixed";
        schedule["value"] = rule.dn.fixed_value;
      }
      out["dn_schedule"] = schedule;
      break;
    }
    case RuleConfig::Type::constant:
      out["type"] = "constant";
      out["loss_value"] = rule.loss_value;
      break;
    case RuleConfig::Type::mean:
      out["type"] = "mean";
      break;
  }
  return out;
}

json distribution_json(const DistributionConfig& dist) {
  json out;
  if (dist.type == DistributionConfig::Type::ridge_ball) {
    out["type"] = "ridge-uniform-ball";
    out["d"] = dist.d;
    out["b_x"] = dist.b_x;
    if (!dist.signal.empty()) out["signal"] = dist.signal;
  } else {
    out["type"] = "srnn-uniform";
    out["eta"] = dist.eta;
  }
  return out;
}

// Canonical form: semantic fields only, in nlohmann's sorted-key order.
// threads/out/format affect execution, never results, and are excluded.
json canonical_json_object(const ExperimentConfig& cfg) {
  json out;
  out["version"] = cfg.version;
  out["experiment"] = kind_name(cfg.kind);
  out["master_seed"] = cfg.master_seed;
  out["rule"] = rule_json(cfg.rule);
  out["distribution"] = distribution_json(cfg.distribution);
  out["n"] = cfg.n;
  out["reps"] = cfg.reps;
  out["stability_reps"] = cfg.stability_reps;
  out["test_m"] = cfg.test_m;
  out["proxy_m"] = cfg.proxy_m;
  out["q_max"] = cfg.q_max;
  out["delta"] = cfg.delta;
  if (cfg.a_policy.mode == APolicyMode::fixed)
    out["a_policy"] = {{"mode", "fixed"}, {"value", cfg.a_policy.value}};
  else
    out["a_policy"] = {{"mode", "optimize"}};
  out["bound"] = cfg.bound;
  if (cfg.unbounded_loss) out["unbounded_loss"] = *cfg.unbounded_loss;
  if (cfg.beta_u) out["beta_u"] = *cfg.beta_u;
  if (cfg.loss_upper) out["loss_upper"] = *cfg.loss_upper;
  if (cfg.radius_override) out["radius_override"] = *cfg.radius_override;
  if (!cfg.bound_inputs.values.empty()) out["inputs"] = cfg.bound_inputs.values;
  if (cfg.bound_inputs.analytic_gaussian) out["analytic_gaussian"] = true;
  if (!cfg.n_grid.empty()) out["n_grid"] = cfg.n_grid;
  if (!cfg.q_grid.empty()) out["q_grid"] = cfg.q_grid;
  if (cfg.estimate_gamma) out["estimate_gamma"] = true;
  if (cfg.apply_monotone_envelope) out["monotone_envelope"] = true;
  if (!cfg.data_csv.empty()) out["data_csv"] = cfg.data_csv;
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

// ---------------------------------------------------------------------------
// small helpers

std::string status_name(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

bool resolve_unbounded(const ExperimentConfig& cfg, const LearningRule& rule) {
  if (cfg.unbounded_loss) return *cfg.unbounded_loss;
  return rule.loss_range().kind == LossRangeKind::unbounded;
}

double binomial_se(double rate, int count) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(count));
}

}  // namespace

double DnSchedule::at(int n) const {
  if (n < 1) throw std::invalid_argument("dn schedule: n must be >= 1");
  if (type == Type::fixed) return fixed_value;
  return coefficient / (static_cast<double>(n) * static_cast<double>(n));
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // e.what() carries the parser's line/byte diagnostic
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  return parse_config(root, /*require_seed=*/true);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string canonical_config_json(const ExperimentConfig& config) {
  return canonical_json_object(config).dump();
}

std::string config_hash(const ExperimentConfig& config) {
  return fnv1a_hex(canonical_config_json(config));
}

std::unique_ptr<LearningRule> make_rule(const RuleConfig& rule, int n) {
  switch (rule.type) {
    case RuleConfig::Type::ridge: return std::make_unique<RidgeRule>(rule.lambda);
    case RuleConfig::Type::srnn: return std::make_unique<SrnnRule>(rule.dn.at(n));
    case RuleConfig::Type::constant:
      return std::make_unique<ConstantLossRule>(rule.loss_value);
    case RuleConfig::Type::mean: return std::make_unique<MeanRule>();
  }
  throw std::logic_error("unreachable");
}

std::unique_ptr<Distribution> make_distribution(const DistributionConfig& dist) {
  if (dist.type == DistributionConfig::Type::ridge_ball)
    return std::make_unique<RidgeBallDistribution>(static_cast<std::size_t>(dist.d),
                                                   dist.b_x, dist.signal);
  return std::make_unique<SrnnUniformDistribution>(dist.eta);
}

// ---------------------------------------------------------------------------
// coverage

CoverageOutcome run_coverage(const ExperimentConfig& cfg, WorkCounters* counters) {
  AtomicCounters atomic_counters;
  const auto dist_inner = make_distribution(cfg.distribution);
  const auto rule_inner = make_rule(cfg.rule, cfg.n);
  const CountingRule rule(*rule_inner, atomic_counters);
  const CountingDistribution dist(*dist_inner, atomic_counters);

  const SeedStream root(cfg.master_seed);
  const SeedStream estimate = root.child(0);  // estimation and validation phases
  const SeedStream validate = root.child(1);  // consume disjoint branches
  const bool unbounded = resolve_unbounded(cfg, rule);

  CoverageOutcome out;
  out.stability.replacement_proxy = unbounded;

  if (cfg.bound == "uniform-baseline") {
    if (!cfg.beta_u || !cfg.loss_upper)
      throw std::runtime_error(
          "config: uniform-baseline coverage needs 'beta_u' and 'loss_upper'");
    BoundReport report;
    report.kind = "uniform-baseline";
    report.delta = cfg.delta;
    report.inputs = {{"beta_u", *cfg.beta_u},
                     {"M", *cfg.loss_upper},
                     {"n", static_cast<double>(cfg.n)}};
    report.radius = uniform_stability_bound(*cfg.beta_u, *cfg.loss_upper, cfg.n, cfg.delta);
    report.coverage_target = cfg.delta;
    out.bound = report;
    out.stability.envelope_source = "supplied";
  } else if (cfg.bound == "ridge-closed-form") {
    if (cfg.rule.type != RuleConfig::Type::ridge ||
        cfg.distribution.type != DistributionConfig::Type::ridge_ball)
      throw std::runtime_error("config: ridge-closed-form coverage needs the ridge rule");
    const auto& ball = static_cast<const RidgeBallDistribution&>(*dist_inner);
    if (!ball.pure_noise())
      throw std::runtime_error(
          "config: the analytic response oracle requires a zero signal vector");
    const UwFit fit = fit_uw(gaussian_response_fourth_moment_profile(cfg.q_max));
    const double mu = 1.0;  // ||Y^2||_2 for the pure-noise response
    out.bound = ridge_deleted_tail_bound(ball.b_x(), cfg.rule.lambda, cfg.n, mu,
                                         fit.uw.u, fit.uw.w, cfg.delta);
    out.stability.uw = fit.uw;
    out.stability.uw_diagnostics = fit.diagnostics;
    out.stability.envelope_source = "analytic-gaussian";
  } else if (cfg.bound == "deleted" || cfg.bound == "resubstitution" ||
             cfg.bound == "deleted-simplified") {
    const bool resub = cfg.bound == "resubstitution";
    const StabilitySweep sweep_n =
        stability_sweep(rule, dist, cfg.n, cfg.stability_reps, estimate.child(0),
                        cfg.threads);
    const StabilitySweep sweep_nm1 =
        stability_sweep(rule, dist, cfg.n - 1, cfg.stability_reps, estimate.child(1),
                        cfg.threads);

    StabilityInputsRecord& rec = out.stability;
    rec.beta1_n = sweep_n.beta_value(1);
    rec.beta1_se = sweep_n.beta_se(1);
    rec.beta2_nm1 = sweep_nm1.beta_value(2);
    rec.beta2_se = sweep_nm1.beta_se(2);
    if (resub) {
      rec.gamma1_n = sweep_n.gamma_value(1);
      rec.gamma1_se = sweep_n.gamma_se(1);
    }

    MomentProfile lhs_profile;
    lhs_profile.sample_count = static_cast<std::size_t>(cfg.stability_reps);
    const EnvelopeKind kind =
        resub ? EnvelopeKind::resubstitution : EnvelopeKind::deleted_estimate;
    for (int q = 1; q <= cfg.q_max; ++q) {
      EnvelopeInputs inputs;
      inputs.beta_4q_nm1 = sweep_nm1.beta_value(4 * q);
      if (resub) {
        inputs.gamma_4q_n = sweep_n.gamma_value(4 * q);
        inputs.gamma_4q_nm1 = sweep_nm1.gamma_value(4 * q);
      }
      inputs.loss_norms_4q = sweep_n.loss_norms(4.0 * q);
      lhs_profile.m2q[q] = envelope_lhs(kind, q, cfg.n, inputs, unbounded);
    }
    rec.envelope_lhs_profile =
        std::map<int, double>(lhs_profile.m2q.begin(), lhs_profile.m2q.end());
    const UwFit fit = fit_uw(lhs_profile);
    rec.uw = fit.uw;
    rec.uw_diagnostics = fit.diagnostics;
    rec.envelope_source = "estimated";

    if (cfg.bound == "deleted-simplified") {
      BoundReport report;
      report.kind = "deleted-simplified";
      report.delta = cfg.delta;
      report.inputs = {{"beta1_n", rec.beta1_n}, {"beta2_nm1", rec.beta2_nm1},
                       {"u1", fit.uw.u},         {"w1", fit.uw.w},
                       {"n", static_cast<double>(cfg.n)}};
      report.radius = deleted_tail_bound_simplified(rec.beta1_n, rec.beta2_nm1, fit.uw.u,
                                                    fit.uw.w, cfg.n, cfg.delta);
      report.coverage_target = 2.0 * cfg.delta;
      out.bound = report;
    } else {
      auto radius_at = [&](double a) {
        return deleted_tail_bound(rec.beta1_n, rec.beta2_nm1, fit.uw.u, fit.uw.w, cfg.n,
                                  cfg.delta, a)
            .radius;
      };
      double a = cfg.a_policy.value;
      std::optional<double> heuristic_a, heuristic_radius;
      if (cfg.a_policy.mode == APolicyMode::optimize) {
        const OptimizeAResult opt = optimize_a(
            radius_at, 1e-3, 1e3,
            fit.uw.w > 0.0 ? std::optional<double>(fit.uw.w) : std::nullopt);
        a = opt.a;
        heuristic_a = opt.heuristic_a;
        heuristic_radius = opt.heuristic_radius;
      }
      out.bound = resub ? resubstitution_tail_bound(rec.beta1_n, rec.gamma1_n,
                                                    rec.beta2_nm1, fit.uw.u, fit.uw.w,
                                                    cfg.n, cfg.delta, a)
                        : deleted_tail_bound(rec.beta1_n, rec.beta2_nm1, fit.uw.u,
                                             fit.uw.w, cfg.n, cfg.delta, a);
      out.bound.heuristic_a = heuristic_a;
      if (heuristic_radius && resub) *heuristic_radius += rec.gamma1_n;
      out.bound.heuristic_radius = heuristic_radius;
    }
  } else {
    throw std::runtime_error("config: bound '" + cfg.bound +
                             "' is not valid for the coverage experiment");
  }

  if (cfg.radius_override) out.bound.radius = *cfg.radius_override;

  const bool use_res_gap = cfg.bound == "resubstitution";
  out.gaps = gap_samples(rule, dist, cfg.n, cfg.reps, cfg.test_m, validate, cfg.threads);
  out.violated.resize(out.gaps.size());
  std::size_t violations = 0;
  for (std::size_t r = 0; r < out.gaps.size(); ++r) {
    const GapSample& gap = out.gaps[r];
    // The test-set stderr inflates the gap, erring against the bound.
    const double effective =
        (use_res_gap ? gap.gap_res : gap.gap_del) + gap.triple.mc_risk_se;
    out.violated[r] = effective > out.bound.radius;
    violations += out.violated[r] ? 1 : 0;
  }
  out.violation_rate = static_cast<double>(violations) / static_cast<double>(cfg.reps);
  out.rate_se = binomial_se(out.violation_rate, cfg.reps);
  out.target = out.bound.coverage_target;

  char detail[160];
  if (static_cast<double>(cfg.reps) * cfg.delta < 5.0) {
    out.verdict.status = VerdictStatus::inconclusive;
    std::snprintf(detail, sizeof(detail),
                  "reps*delta = %.3g < 5: too few replications to falsify the statement",
                  static_cast<double>(cfg.reps) * cfg.delta);
  } else {
    const bool pass = out.violation_rate <= out.target + 3.0 * out.rate_se;
    out.verdict.status = pass ? VerdictStatus::pass : VerdictStatus::fail;
    std::snprintf(detail, sizeof(detail),
                  "violation rate %.4f vs target %.4f + 3*%.4f (radius %.6g)",
                  out.violation_rate, out.target, out.rate_se, out.bound.radius);
  }
  out.verdict.name = "coverage";
  out.verdict.detail = detail;

  merge_counters(atomic_counters, counters);
  return out;
}

// ---------------------------------------------------------------------------
// short-range nearest-neighbour demonstration

SrnnDemoOutcome run_srnn_demo(const ExperimentConfig& cfg, WorkCounters* counters) {
  if (cfg.rule.type != RuleConfig::Type::srnn ||
      cfg.distribution.type != DistributionConfig::Type::srnn_uniform)
    throw std::runtime_error("config: srnn-demo needs the srnn rule and distribution");
  AtomicCounters atomic_counters;
  const auto dist_inner = make_distribution(cfg.distribution);
  const CountingDistribution dist(*dist_inner, atomic_counters);

  SrnnDemoOutcome out;
  out.eta = cfg.distribution.eta;
  std::vector<int> grid = cfg.n_grid.empty() ? std::vector<int>{25, 50, 100} : cfg.n_grid;

  // schedule sanity over the grid: d_n nonincreasing and n d_n shrinking
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] <= grid[k - 1]) throw std::runtime_error("config: n_grid must increase");
    if (cfg.rule.dn.at(grid[k]) > cfg.rule.dn.at(grid[k - 1]))
      throw std::runtime_error("config: d_n must be nonincreasing over the n-grid");
    if (grid[k] * cfg.rule.dn.at(grid[k]) > grid[k - 1] * cfg.rule.dn.at(grid[k - 1]))
      throw std::runtime_error("config: n*d_n must be nonincreasing over the n-grid");
  }

  const SeedStream root(cfg.master_seed);
  bool all_resub_zero = true;
  bool risk_bound_ok = true;
  bool beta_ok = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const int n = grid[k];
    const SeedStream node = root.child(k);
    const auto rule_inner = make_rule(cfg.rule, n);
    const CountingRule rule(*rule_inner, atomic_counters);

    SrnnDemoRow row;
    row.n = n;
    row.dn = cfg.rule.dn.at(n);

    const auto gaps =
        gap_samples(rule, dist, n, cfg.reps, cfg.test_m, node.child(0), cfg.threads);
    std::vector<double> risks, gap_del;
    risks.reserve(gaps.size());
    gap_del.reserve(gaps.size());
    for (const auto& gap : gaps) {
      row.max_abs_resubstitution =
          std::max(row.max_abs_resubstitution, std::fabs(gap.triple.resubstitution));
      risks.push_back(gap.triple.mc_risk);
      gap_del.push_back(gap.gap_del);
    }
    row.resubstitution_all_zero = row.max_abs_resubstitution == 0.0;
    row.mean_risk = mean(risks);
    row.mean_risk_se = stderr_of_mean(risks);
    row.risk_lower_bound = out.eta - 2.0 * static_cast<double>(n) * row.dn;
    row.median_gap_del = median(gap_del);

    const StabilitySweep sweep =
        stability_sweep(rule, dist, n, cfg.stability_reps, node.child(1), cfg.threads);
    row.beta1 = sweep.beta_value(1);
    row.beta1_se = sweep.beta_se(1);

    all_resub_zero = all_resub_zero && row.resubstitution_all_zero;
    risk_bound_ok = risk_bound_ok &&
                    row.mean_risk >= row.risk_lower_bound - 3.0 * row.mean_risk_se;
    beta_ok = beta_ok && row.beta1 <= 2.0 * row.dn + 3.0 * row.beta1_se;
    out.rows.push_back(row);
  }

  bool medians_decreasing = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    medians_decreasing =
        medians_decreasing && out.rows[k].median_gap_del < out.rows[k - 1].median_gap_del;

  auto verdict = [](const std::string& name, bool pass, const std::string& detail) {
    return Verdict{name, pass ? VerdictStatus::pass : VerdictStatus::fail, detail};
  };
  out.verdicts.push_back(verdict("resubstitution-identically-zero", all_resub_zero,
                                 "training error must vanish on every replication"));
  out.verdicts.push_back(verdict("risk-lower-bound", risk_bound_ok,
                                 "mean risk >= eta - 2 n d_n - 3 stderr at each n"));
  out.verdicts.push_back(verdict("beta1-within-range-bound", beta_ok,
                                 "beta_1 <= 2 d_n + 3 stderr at each n"));
  out.verdicts.push_back(verdict("deleted-gap-median-decreasing", medians_decreasing,
                                 "median |R_DEL - R| decreasing across the n-grid"));
  merge_counters(atomic_counters, counters);
  return out;
}

// ---------------------------------------------------------------------------
// ridge demonstration

RidgeDemoOutcome run_ridge_demo(const ExperimentConfig& cfg, WorkCounters* counters) {
  if (cfg.rule.type != RuleConfig::Type::ridge ||
      cfg.distribution.type != DistributionConfig::Type::ridge_ball)
    throw std::runtime_error("config: ridge-demo needs the ridge rule and distribution");
  if (!cfg.distribution.signal.empty())
    for (double w : cfg.distribution.signal)
      if (w != 0.0)
        throw std::runtime_error(
            "config: ridge-demo uses the analytic response oracle; signal must be zero");

  AtomicCounters atomic_counters;
  RidgeDemoOutcome out;
  const UwFit fit = fit_uw(gaussian_response_fourth_moment_profile(cfg.q_max));
  out.u_y = fit.uw.u;
  out.w_y = fit.uw.w;
  out.mu = 1.0;
  out.moment_source = "analytic-gaussian";
  out.kappa = ridge_kappa(cfg.distribution.b_x, cfg.rule.lambda, cfg.n);
  out.kappa_hat = ridge_kappa_hat(cfg.distribution.b_x, cfg.rule.lambda, cfg.n);

  ExperimentConfig coverage_cfg = cfg;
  coverage_cfg.kind = ExperimentKind::coverage;
  coverage_cfg.bound = "ridge-closed-form";
  WorkCounters coverage_counters;
  out.coverage = run_coverage(coverage_cfg, &coverage_counters);
  if (counters) {
    counters->fit_count += coverage_counters.fit_count;
    counters->loss_eval_count += coverage_counters.loss_eval_count;
    counters->sample_count += coverage_counters.sample_count;
  }

  const auto dist_inner = make_distribution(cfg.distribution);
  const auto rule_inner = make_rule(cfg.rule, cfg.n);
  const CountingRule rule(*rule_inner, atomic_counters);
  const CountingDistribution dist(*dist_inner, atomic_counters);
  const SeedStream root(cfg.master_seed);
  const SeedStream table_stream = root.child(2);  // disjoint from coverage phases

  const std::vector<int> q_grid = cfg.q_grid.empty() ? std::vector<int>{1, 2} : cfg.q_grid;
  const std::vector<int> n_grid =
      cfg.n_grid.empty() ? std::vector<int>{12, 24, 48} : cfg.n_grid;
  bool table_ok = true;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const int n = n_grid[k];
    const StabilitySweep sweep =
        stability_sweep(rule, dist, n, cfg.stability_reps, table_stream.child(k),
                        cfg.threads);
    for (int q : q_grid) {
      RidgeBetaTableRow row;
      row.q = q;
      row.n = n;
      row.mc_value = sweep.beta_value(q);
      row.mc_se = sweep.beta_se(q);
      row.closed_form = ridge_beta_q_bound(cfg.distribution.b_x, cfg.rule.lambda, n,
                                           gaussian_response_norm2q_sq(q));
      row.within_bound = row.mc_value <= row.closed_form + 3.0 * row.mc_se;
      table_ok = table_ok && row.within_bound;
      out.beta_table.push_back(row);
    }
  }

  out.verdicts.push_back(out.coverage.verdict);
  out.verdicts.push_back(
      Verdict{"beta-table-within-closed-form",
              table_ok ? VerdictStatus::pass : VerdictStatus::fail,
              "MC beta_q <= closed-form bound + 3 stderr over the (q,n) grid"});
  merge_counters(atomic_counters, counters);
  return out;
}

// ---------------------------------------------------------------------------
// stability profile

StabilityProfileOutcome run_stability_profile(const ExperimentConfig& cfg,
                                              WorkCounters* counters) {
  AtomicCounters atomic_counters;
  const auto dist_inner = make_distribution(cfg.distribution);
  const CountingDistribution dist(*dist_inner, atomic_counters);
  const SeedStream root(cfg.master_seed);

  const std::vector<int> n_grid = cfg.n_grid.empty() ? std::vector<int>{cfg.n} : cfg.n_grid;
  const std::vector<int> q_grid = cfg.q_grid.empty() ? std::vector<int>{1, 2} : cfg.q_grid;

  StabilityProfileOutcome out;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const int n = n_grid[k];
    const auto rule_inner = make_rule(cfg.rule, n);
    const CountingRule rule(*rule_inner, atomic_counters);
    const StabilitySweep sweep =
        stability_sweep(rule, dist, n, cfg.stability_reps, root.child(k), cfg.threads);
    for (int q : q_grid) {
      out.profile.entries.push_back(sweep.beta_estimate(q));
      if (cfg.estimate_gamma) out.profile.entries.push_back(sweep.gamma_estimate(q));
    }
  }

  if (cfg.apply_monotone_envelope) {
    out.profile.monotone_envelope_applied = true;
    for (int q : q_grid) {
      for (int kind_index = 0; kind_index < 2; ++kind_index) {
        const StabilityKind kind =
            kind_index == 0 ? StabilityKind::beta : StabilityKind::gamma;
        std::map<int, double> by_n;
        for (const auto& e : out.profile.entries)
          if (e.kind == kind && e.q == q) by_n[e.n] = e.value;
        if (by_n.empty()) continue;
        const auto envelope = monotone_envelope(by_n);
        for (auto& e : out.profile.entries)
          if (e.kind == kind && e.q == q) e.value = envelope.at(e.n);
      }
    }
  }
  merge_counters(atomic_counters, counters);
  return out;
}

// ---------------------------------------------------------------------------
// direct bound evaluation

BoundEvalOutcome run_bound_eval(const ExperimentConfig& cfg, WorkCounters* counters) {
  (void)counters;
  const auto& values = cfg.bound_inputs.values;
  auto get = [&](const char* name) {
    const auto it = values.find(name);
    if (it == values.end())
      throw std::runtime_error(std::string("config: bound-eval needs inputs.") + name);
    return it->second;
  };
  auto resolve_a = [&](const std::function<double(double)>& radius_at,
                       std::optional<double> w1) {
    if (cfg.a_policy.mode == APolicyMode::fixed)
      return OptimizeAResult{cfg.a_policy.value, radius_at(cfg.a_policy.value),
                             std::nullopt, std::nullopt};
    return optimize_a(radius_at, 1e-3, 1e3, w1);
  };

  BoundEvalOutcome out;
  if (cfg.bound == "deleted" || cfg.bound == "resubstitution") {
    const bool resub = cfg.bound == "resubstitution";
    const double beta1 = get("beta1_n");
    const double beta2 = get("beta2_nm1");
    const double u1 = get("u1");
    const double w1 = get("w1");
    const double gamma1 = resub ? get("gamma1_n") : 0.0;
    auto radius_at = [&](double a) {
      return deleted_tail_bound(beta1, beta2, u1, w1, cfg.n, cfg.delta, a).radius;
    };
    const OptimizeAResult opt = resolve_a(
        radius_at, w1 > 0.0 ? std::optional<double>(w1) : std::nullopt);
    out.report = resub ? resubstitution_tail_bound(beta1, gamma1, beta2, u1, w1, cfg.n,
                                                   cfg.delta, opt.a)
                       : deleted_tail_bound(beta1, beta2, u1, w1, cfg.n, cfg.delta, opt.a);
    out.report.heuristic_a = opt.heuristic_a;
    out.report.heuristic_radius = opt.heuristic_radius;
  } else if (cfg.bound == "deleted-simplified") {
    BoundReport report;
    report.kind = "deleted-simplified";
    report.delta = cfg.delta;
    const double beta1 = get("beta1_n"), beta2 = get("beta2_nm1");
    const double u1 = get("u1"), w1 = get("w1");
    report.inputs = {{"beta1_n", beta1}, {"beta2_nm1", beta2}, {"u1", u1}, {"w1", w1},
                     {"n", static_cast<double>(cfg.n)}};
    report.radius =
        deleted_tail_bound_simplified(beta1, beta2, u1, w1, cfg.n, cfg.delta);
    report.coverage_target = 2.0 * cfg.delta;
    out.report = report;
  } else if (cfg.bound == "uniform-baseline") {
    BoundReport report;
    report.kind = "uniform-baseline";
    report.delta = cfg.delta;
    const double beta_u = get("beta_u"), upper = get("M");
    report.inputs = {{"beta_u", beta_u}, {"M", upper}, {"n", static_cast<double>(cfg.n)}};
    report.radius = uniform_stability_bound(beta_u, upper, cfg.n, cfg.delta);
    report.coverage_target = cfg.delta;
    out.report = report;
  } else if (cfg.bound == "ridge-closed-form") {
    double b_x = cfg.distribution.b_x;
    if (values.count("b_x")) b_x = values.at("b_x");
    const double lambda = values.count("lambda") ? values.at("lambda") : cfg.rule.lambda;
    double mu, u_y, w_y;
    if (cfg.bound_inputs.analytic_gaussian) {
      const UwFit fit = fit_uw(gaussian_response_fourth_moment_profile(cfg.q_max));
      mu = 1.0;
      u_y = fit.uw.u;
      w_y = fit.uw.w;
    } else {
      mu = get("mu");
      u_y = get("u_y");
      w_y = get("w_y");
    }
    int n = cfg.n;
    if (!cfg.data_csv.empty()) {
      double inferred_b_x = 0.0;
      const Dataset data = load_regression_csv(cfg.data_csv, &inferred_b_x);
      const RidgeRule rule(lambda);
      out.data_resubstitution = resubstitution(rule, data);
      out.data_deleted = deleted(rule, data);
      out.data_b_x = inferred_b_x;
      out.data_n = static_cast<int>(data.size());
      b_x = inferred_b_x;
      n = static_cast<int>(data.size());
    }
    out.report = ridge_deleted_tail_bound(b_x, lambda, n, mu, u_y, w_y, cfg.delta);
  } else if (cfg.bound == "efron-stein") {
    const double e_vdel = get("e_vdel");
    const SubGammaVC vc{get("v"), get("c")};
    auto radius_at = [&](double a) {
      return exp_efron_stein_radius(e_vdel, vc, cfg.delta, a);
    };
    const OptimizeAResult opt = resolve_a(radius_at, std::nullopt);
    BoundReport report;
    report.kind = "efron-stein";
    report.delta = cfg.delta;
    report.a = opt.a;
    report.inputs = {{"e_vdel", e_vdel}, {"v", vc.v}, {"c", vc.c}};
    report.radius = opt.radius;
    report.coverage_target = cfg.delta;
    out.report = report;
  } else {
    throw std::runtime_error("config: unknown bound '" + cfg.bound + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

Dataset load_regression_csv(const std::string& path, double* b_x_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file");
  // header: x_1,...,x_d,y
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "y")
    throw std::runtime_error("csv: header must be x_1,...,x_d,y");
  const std::size_t d = header.size() - 1;
  for (std::size_t i = 0; i < d; ++i) {
    char expected[32];
    std::snprintf(expected, sizeof(expected), "x_%zu", i + 1);
    if (header[i] != expected)
      throw std::runtime_error("csv: column " + std::to_string(i + 1) +
                               " must be named " + expected);
  }

  std::vector<Example> examples;
  double max_norm = 0.0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("csv: line " + std::to_string(line_number) +
                                 ": bad number '" + cell + "'");
      }
    }
    if (row.size() != d + 1)
      throw std::runtime_error("csv: line " + std::to_string(line_number) +
                               ": expected " + std::to_string(d + 1) + " columns");
    RegressionExample example;
    example.x.assign(row.begin(), row.begin() + static_cast<long>(d));
    example.y = row.back();
    double norm_sq = 0.0;
    for (double v : example.x) norm_sq += v * v;
    max_norm = std::max(max_norm, std::sqrt(norm_sq));
    examples.push_back(std::move(example));
  }
  if (examples.empty()) throw std::runtime_error("csv: no data rows");
  if (b_x_out) *b_x_out = max_norm;
  return Dataset(std::move(examples));
}

// ---------------------------------------------------------------------------
// report rendering

namespace {

json bound_report_json(const BoundReport& report) {
  json out;
  out["kind"] = report.kind;
  out["delta"] = report.delta;
  if (report.a) out["a"] = *report.a;
  out["inputs"] = report.inputs;
  out["c1"] = report.c1;
  out["c2"] = report.c2;
  if (report.kappa) out["kappa"] = *report.kappa;
  if (report.kappa_hat) out["kappa_hat"] = *report.kappa_hat;
  out["radius"] = report.radius;
  out["sidedness"] = report.sidedness;
  out["coverage_target"] = report.coverage_target;
  if (report.heuristic_a) out["heuristic_a"] = *report.heuristic_a;
  if (report.heuristic_radius) out["heuristic_radius"] = *report.heuristic_radius;
  return out;
}

json verdict_json(const Verdict& verdict) {
  return json{{"name", verdict.name},
              {"status", status_name(verdict.status)},
              {"detail", verdict.detail}};
}

json coverage_json(const CoverageOutcome& outcome) {
  json gaps;
  std::vector<double> gap_del, gap_res, risk_se;
  std::vector<int> violated;
  gap_del.reserve(outcome.gaps.size());
  for (std::size_t i = 0; i < outcome.gaps.size(); ++i) {
    gap_del.push_back(outcome.gaps[i].gap_del);
    gap_res.push_back(outcome.gaps[i].gap_res);
    risk_se.push_back(outcome.gaps[i].triple.mc_risk_se);
    violated.push_back(outcome.violated[i] ? 1 : 0);
  }
  gaps["gap_del"] = gap_del;
  gaps["gap_res"] = gap_res;
  gaps["mc_risk_stderr"] = risk_se;
  gaps["violated"] = violated;

  json stability;
  stability["beta1_n"] = outcome.stability.beta1_n;
  stability["beta1_stderr"] = outcome.stability.beta1_se;
  stability["beta2_nm1"] = outcome.stability.beta2_nm1;
  stability["beta2_stderr"] = outcome.stability.beta2_se;
  stability["gamma1_n"] = outcome.stability.gamma1_n;
  stability["gamma1_stderr"] = outcome.stability.gamma1_se;
  stability["u1"] = outcome.stability.uw.u;
  stability["w1"] = outcome.stability.uw.w;
  stability["envelope_objective"] = outcome.stability.uw_diagnostics.objective;
  stability["envelope_source"] = outcome.stability.envelope_source;
  stability["replacement_proxy"] = outcome.stability.replacement_proxy;
  json slack, lhs;
  for (const auto& [q, s] : outcome.stability.uw_diagnostics.slack)
    slack[std::to_string(q)] = s;
  for (const auto& [q, s] : outcome.stability.envelope_lhs_profile)
    lhs[std::to_string(q)] = s;
  stability["envelope_slack"] = slack;
  stability["envelope_lhs"] = lhs;

  json out;
  out["bound"] = bound_report_json(outcome.bound);
  out["stability"] = stability;
  out["gaps"] = gaps;
  out["violation_rate"] = outcome.violation_rate;
  out["rate_stderr"] = outcome.rate_se;
  out["target"] = outcome.target;
  out["verdict"] = verdict_json(outcome.verdict);
  return out;
}

json srnn_demo_json(const SrnnDemoOutcome& outcome) {
  json rows = json::array();
  for (const auto& row : outcome.rows) {
    rows.push_back(json{{"n", row.n},
                        {"dn", row.dn},
                        {"resubstitution_all_zero", row.resubstitution_all_zero},
                        {"max_abs_resubstitution", row.max_abs_resubstitution},
                        {"mean_risk", row.mean_risk},
                        {"mean_risk_stderr", row.mean_risk_se},
                        {"risk_lower_bound", row.risk_lower_bound},
                        {"beta1", row.beta1},
                        {"beta1_stderr", row.beta1_se},
                        {"median_gap_del", row.median_gap_del}});
  }
  return json{{"eta", outcome.eta}, {"rows", rows}};
}

json ridge_demo_json(const RidgeDemoOutcome& outcome) {
  json table = json::array();
  for (const auto& row : outcome.beta_table) {
    table.push_back(json{{"q", row.q},
                         {"n", row.n},
                         {"mc_value", row.mc_value},
                         {"mc_stderr", row.mc_se},
                         {"closed_form", row.closed_form},
                         {"within_bound", row.within_bound}});
  }
  return json{{"mu", outcome.mu},
              {"u_y", outcome.u_y},
              {"w_y", outcome.w_y},
              {"kappa", outcome.kappa},
              {"kappa_hat", outcome.kappa_hat},
              {"moment_source", outcome.moment_source},
              {"coverage", coverage_json(outcome.coverage)},
              {"beta_table", table}};
}

json stability_profile_json(const StabilityProfileOutcome& outcome) {
  json entries = json::array();
  for (const auto& e : outcome.profile.entries) {
    entries.push_back(json{{"kind", e.kind == StabilityKind::beta ? "beta" : "gamma"},
                           {"q", e.q},
                           {"n", e.n},
                           {"value", e.value},
                           {"stderr", e.se},
                           {"reps", e.reps},
                           {"seed", e.seed}});
  }
  return json{{"entries", entries},
              {"monotone_envelope", outcome.profile.monotone_envelope_applied}};
}

json bound_eval_json(const BoundEvalOutcome& outcome) {
  json out;
  out["bound"] = bound_report_json(outcome.report);
  if (outcome.data_n) {
    out["data"] = json{{"n", *outcome.data_n},
                       {"b_x_inferred", *outcome.data_b_x},
                       {"resubstitution", *outcome.data_resubstitution},
                       {"deleted", *outcome.data_deleted}};
  }
  return out;
}

}  // namespace

std::string coverage_csv(const CoverageOutcome& outcome) {
  std::string out = "rep,gap_del,gap_res,radius,violated\n";
  char line[160];
  for (std::size_t r = 0; r < outcome.gaps.size(); ++r) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%d\n", r,
                  outcome.gaps[r].gap_del, outcome.gaps[r].gap_res, outcome.bound.radius,
                  outcome.violated[r] ? 1 : 0);
    out += line;
  }
  return out;
}

std::string proxy_samples_json(const ProxySamples& proxy) {
  json out;
  out["z"] = proxy.z;
  out["variants"] = proxy.variants;
  out["proxy_value"] = proxy.proxy_value;
  out["kind"] = proxy.kind == ProxyKind::removal ? "removal" : "replacement";
  out["instantiation"] = proxy.instantiation == ProxyInstantiation::deleted_estimate
                             ? "deleted-estimate"
                             : "true-risk";
  if (proxy.z_mc_variance > 0.0) out["z_mc_variance"] = proxy.z_mc_variance;
  return out.dump();
}

std::string efron_stein_report_json(const EfronSteinReport& report) {
  json out;
  out["var_z"] = report.var_z;
  out["var_z_stderr"] = report.var_z_se;
  out["mean_v"] = report.mean_v;
  out["mean_v_stderr"] = report.mean_v_se;
  out["mean_vdel"] = report.mean_vdel;
  out["mean_vdel_stderr"] = report.mean_vdel_se;
  out["var_le_v"] = report.var_le_v;
  out["v_le_vdel"] = report.v_le_vdel;
  out["pass"] = report.pass;
  return out.dump();
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  result.config = config;
  WorkCounters counters;
  json results;

  switch (config.kind) {
    case ExperimentKind::coverage: {
      const CoverageOutcome outcome = run_coverage(config, &counters);
      results = coverage_json(outcome);
      results["experiment"] = "coverage";
      result.verdicts = {outcome.verdict};
      if (config.format == "csv") {
        result.csv = coverage_csv(outcome);
        result.csv_name = "coverage.csv";
      }
      break;
    }
    case ExperimentKind::srnn_demo: {
      const SrnnDemoOutcome outcome = run_srnn_demo(config, &counters);
      results = srnn_demo_json(outcome);
      results["experiment"] = "srnn-demo";
      result.verdicts = outcome.verdicts;
      break;
    }
    case ExperimentKind::ridge_demo: {
      const RidgeDemoOutcome outcome = run_ridge_demo(config, &counters);
      results = ridge_demo_json(outcome);
      results["experiment"] = "ridge-demo";
      result.verdicts = outcome.verdicts;
      if (config.format == "csv") {
        result.csv = coverage_csv(outcome.coverage);
        result.csv_name = "coverage.csv";
      }
      break;
    }
    case ExperimentKind::stability_profile: {
      const StabilityProfileOutcome outcome = run_stability_profile(config, &counters);
      results = stability_profile_json(outcome);
      results["experiment"] = "stability-profile";
      if (config.format == "csv") {
        result.csv = stability_profile_csv(outcome.profile);
        result.csv_name = "stability.csv";
      }
      break;
    }
    case ExperimentKind::bound_eval: {
      const BoundEvalOutcome outcome = run_bound_eval(config, &counters);
      results = bound_eval_json(outcome);
      results["experiment"] = "bound-eval";
      break;
    }
  }

  result.counters = counters;
  json report;
  report["config"] = canonical_json_object(config);
  report["config_hash"] = config_hash(config);
  report["seed"] = config.master_seed;
  report["results"] = results;
  json verdicts = json::array();
  for (const auto& v : result.verdicts) verdicts.push_back(verdict_json(v));
  report["verdicts"] = verdicts;
  // Deterministic work counters stand in for wall-clock timings so repeated
  // runs stay byte-identical; see the cost model in the README.
  report["timings"] = json{{"fit_count", counters.fit_count},
                           {"loss_eval_count", counters.loss_eval_count},
                           {"sample_count", counters.sample_count}};
  result.report_json = report.dump(2) + "\n";
  return result;
}

int write_run_result(const RunResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(result.config.out_dir);
  const fs::path dir(result.config.out_dir);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report.json");
    out << result.report_json;
  }
  if (result.csv) {
    std::ofstream out(dir / result.csv_name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + result.csv_name);
    out << *result.csv;
  }
  for (const auto& v : result.verdicts)
    if (v.status != VerdictStatus::pass) return 2;
  return 0;
}

int summarize_report_file(const std::string& path, std::string* summary) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open '" + path + "'");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("report: ") + e.what());
  }
  std::ostringstream os;
  os << "experiment: " << report.at("results").value("experiment", "?") << "\n";
  os << "config_hash: " << report.value("config_hash", "?") << "\n";
  os << "seed: " << report.value("seed", 0ULL) << "\n";
  int exit_code = 0;
  if (report.contains("verdicts")) {
    for (const auto& v : report.at("verdicts")) {
      const std::string status = v.value("status", "?");
      os << "[" << status << "] " << v.value("name", "?") << ": "
         << v.value("detail", "") << "\n";
      if (status != "pass") exit_code = 2;
    }
  }
  if (summary) *summary = os.str();
  return exit_code;
}

}  // namespace stabletail
