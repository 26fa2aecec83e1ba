#include "stabletail/subgamma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stabletail/estimators.hpp"

namespace stabletail {

SubGammaVC uw_to_vc(const SubGammaUW& uw) {
  return {4.0 * (1.1 * uw.u + 0.53 * uw.w * uw.w), 1.46 * uw.w};
}

double forward_moment_bound(int q, const SubGammaVC& vc) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  const double dq = static_cast<double>(q);
  return 10.0 * std::max(std::sqrt(dq * vc.v), dq * vc.c);
}

double forward_moment_bound_tight(int q, const SubGammaVC& vc) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  const double dq = static_cast<double>(q);
  return std::max(std::sqrt(16.8 * dq * vc.v), 9.6 * dq * vc.c);
}

namespace {

bool envelope_feasible(const MomentProfile& profile, double u, double w) {
  for (const auto& [q, m] : profile.m2q) {
    const double dq = static_cast<double>(q);
    const double env = std::max(std::sqrt(dq * u), dq * w);
    if (env < m * (1.0 - 1e-12)) return false;
  }
  return true;
}

bool exact_match(const MomentProfile& profile, double u, double w) {
  for (const auto& [q, m] : profile.m2q) {
    const double dq = static_cast<double>(q);
    const double env = std::max(std::sqrt(dq * u), dq * w);
    if (std::fabs(env - m) > 1e-9 * std::max(1.0, std::fabs(m))) return false;
  }
  return true;
}

double objective(double u, double w) {
  const SubGammaVC vc = uw_to_vc({u, w});
  return vc.v + vc.c;
}

}  // namespace

UwFit fit_uw(const MomentProfile& profile) {
  if (profile.m2q.empty()) throw std::invalid_argument("empty-sample");
  for (const auto& [q, m] : profile.m2q) {
    if (q < 1) throw std::invalid_argument("invalid-order");
    if (m < 0.0) throw std::invalid_argument("fit_uw: negative moment");
  }

  double u_only = 0.0, w_only = 0.0;
  for (const auto& [q, m] : profile.m2q) {
    const double dq = static_cast<double>(q);
    u_only = std::max(u_only, m * m / dq);
    w_only = std::max(w_only, m / dq);
  }

  UwFit fit;
  // An exactly matching single-branch envelope is the tightest of its form;
  // prefer it over the heuristic search.
  if (exact_match(profile, u_only, 0.0)) {
    fit.uw = {u_only, 0.0};
    fit.diagnostics.exact_u_match = true;
  } else if (exact_match(profile, 0.0, w_only)) {
    fit.uw = {0.0, w_only};
    fit.diagnostics.exact_w_match = true;
  } else {
    SubGammaUW best{u_only, 0.0};
    double best_obj = objective(u_only, 0.0);
    auto consider = [&](double u, double w) {
      if (!envelope_feasible(profile, u, w)) return;
      const double obj = objective(u, w);
      if (obj < best_obj) {
        best_obj = obj;
        best = {u, w};
      }
    };
    consider(0.0, w_only);
    // 1-D sweep trading u against w: for each w, the smallest feasible u
    // covers exactly the orders the w-branch leaves uncovered.
    constexpr int kSweepPoints = 128;
    for (int k = 1; k < kSweepPoints; ++k) {
      const double w = w_only * static_cast<double>(k) / kSweepPoints;
      double u_needed = 0.0;
      for (const auto& [q, m] : profile.m2q) {
        const double dq = static_cast<double>(q);
        if (dq * w < m) u_needed = std::max(u_needed, m * m / dq);
      }
      consider(u_needed, w);
    }
    fit.uw = best;
  }

  fit.diagnostics.objective = objective(fit.uw.u, fit.uw.w);
  for (const auto& [q, m] : profile.m2q) {
    const double dq = static_cast<double>(q);
    fit.diagnostics.slack[q] = std::max(std::sqrt(dq * fit.uw.u), dq * fit.uw.w) - m;
  }
  return fit;
}

std::vector<TailCheckPoint> tail_violation_rate(std::span<const double> centered_samples,
                                                const SubGammaVC& vc,
                                                std::span<const double> t_grid) {
  if (centered_samples.empty()) throw std::invalid_argument("empty-sample");
  const double m = static_cast<double>(centered_samples.size());
  std::vector<TailCheckPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("tail_violation_rate: t must be positive");
    TailCheckPoint point;
    point.t = t;
    point.radius = std::sqrt(2.0 * vc.v * t) + vc.c * t;
    std::size_t upper = 0, lower = 0;
    for (double x : centered_samples) {
      if (x > point.radius) ++upper;
      if (-x > point.radius) ++lower;
    }
    point.exceedance = static_cast<double>(std::max(upper, lower)) / m;
    point.target = std::exp(-t);
    point.se = std::sqrt(point.exceedance * (1.0 - point.exceedance) / m);
    point.violated = point.exceedance > point.target + 3.0 * point.se;
    out.push_back(point);
  }
  return out;
}

namespace {

double finish_proxy(ProxySamples& proxy) {
  KahanSum acc;
  for (double variant : proxy.variants) {
    const double diff = proxy.z - variant;
    acc.add(diff * diff);
  }
  proxy.proxy_value = acc.value();
  return proxy.proxy_value;
}

// Mean loss of a fixed hypothesis over a fixed example pool.
double pool_risk(const LearningRule& rule, const Hypothesis& h,
                 const std::vector<Example>& pool, double* variance_of_mean = nullptr) {
  KahanSum sum, sum_sq;
  for (const auto& e : pool) {
    const double loss = rule.loss(h, e);
    sum.add(loss);
    sum_sq.add(loss * loss);
  }
  const double m = static_cast<double>(pool.size());
  const double mean_loss = sum.value() / m;
  if (variance_of_mean) {
    double var = 0.0;
    if (pool.size() > 1)
      var = std::max(0.0, (sum_sq.value() - m * mean_loss * mean_loss) / (m - 1.0));
    *variance_of_mean = var / m;
  }
  return mean_loss;
}

}  // namespace

ProxySamples vdel_for_deleted(const LearningRule& rule, const Dataset& data) {
  const std::size_t n = data.size();
  if (n < 3) throw std::invalid_argument("vdel_for_deleted: needs n >= 3");
  ProxySamples proxy;
  proxy.kind = ProxyKind::removal;
  proxy.instantiation = ProxyInstantiation::deleted_estimate;
  proxy.z = deleted(rule, data);
  proxy.variants.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Hypothesis h = rule.fit(data.remove2(i, j));
      acc.add(rule.loss(h, data[j]));
    }
    proxy.variants[i] = acc.value() / static_cast<double>(n);
  }
  finish_proxy(proxy);
  return proxy;
}

ProxySamples vdel_for_risk(const LearningRule& rule, const Dataset& data,
                           const Distribution& dist, int m, const SeedStream& stream) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  if (m < 1) throw std::invalid_argument("vdel_for_risk: m must be >= 1");
  std::vector<Example> pool;
  pool.reserve(static_cast<std::size_t>(m));
  Rng rng = stream.rng();
  for (int j = 0; j < m; ++j) pool.push_back(dist.sample(rng));

  ProxySamples proxy;
  proxy.kind = ProxyKind::removal;
  proxy.instantiation = ProxyInstantiation::true_risk;
  proxy.z = pool_risk(rule, rule.fit(data), pool, &proxy.z_mc_variance);
  proxy.variants.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    proxy.variants[i] = pool_risk(rule, rule.fit(data.remove(i)), pool);
  finish_proxy(proxy);
  return proxy;
}

ProxySamples v_replacement(const LearningRule& rule, const Dataset& data,
                           const std::vector<Example>& fresh_examples,
                           ProxyInstantiation instantiation, const Distribution* dist,
                           int m, const SeedStream* stream) {
  const std::size_t n = data.size();
  if (fresh_examples.size() != n)
    throw std::invalid_argument("v_replacement: fresh example count mismatch");
  ProxySamples proxy;
  proxy.kind = ProxyKind::replacement;
  proxy.instantiation = instantiation;
  proxy.variants.resize(n, 0.0);

  if (instantiation == ProxyInstantiation::deleted_estimate) {
    if (n < 3) throw std::invalid_argument("v_replacement: needs n >= 3");
    proxy.z = deleted(rule, data);
    for (std::size_t i = 0; i < n; ++i)
      proxy.variants[i] = deleted(rule, data.replace(i, fresh_examples[i]));
  } else {
    if (n < 2) throw std::invalid_argument("needs-two-examples");
    if (!dist || !stream || m < 1)
      throw std::invalid_argument("v_replacement: true-risk variant needs dist, m, stream");
    std::vector<Example> pool;
    pool.reserve(static_cast<std::size_t>(m));
    Rng rng = stream->rng();
    for (int j = 0; j < m; ++j) pool.push_back(dist->sample(rng));
    proxy.z = pool_risk(rule, rule.fit(data), pool, &proxy.z_mc_variance);
    for (std::size_t i = 0; i < n; ++i)
      proxy.variants[i] =
          pool_risk(rule, rule.fit(data.replace(i, fresh_examples[i])), pool);
  }
  finish_proxy(proxy);
  return proxy;
}

double efron_stein_v_estimate(const ProxySamples& proxy) {
  return proxy.kind == ProxyKind::replacement ? 0.5 * proxy.proxy_value : proxy.proxy_value;
}

double proxy_moment_rhs_deleted(int q, int n, std::span<const double> loss_norms_4q,
                                double beta_4q_nm1, bool replacement_proxy) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  KahanSum norm_sq;
  for (double norm : loss_norms_4q) {
    if (norm < 0.0) throw std::invalid_argument("negative norm");
    norm_sq.add(norm * norm);
  }
  const double dn = static_cast<double>(n);
  const double scale = replacement_proxy ? 4.0 : 1.0;
  return scale * (2.0 / (dn * dn) * norm_sq.value() + 2.0 * dn * beta_4q_nm1 * beta_4q_nm1);
}

double proxy_moment_rhs_risk(int q, int n, double beta_4q_n, bool replacement_proxy) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  const double scale = replacement_proxy ? 4.0 : 1.0;
  return scale * static_cast<double>(n) * beta_4q_n * beta_4q_n;
}

double envelope_lhs(EnvelopeKind kind, int q, int n, const EnvelopeInputs& inputs,
                    bool replacement_proxy) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  const double dn = static_cast<double>(n);
  KahanSum norm_sq;
  for (double norm : inputs.loss_norms_4q) norm_sq.add(norm * norm);
  const double loss_term = 2.0 / (dn * dn) * norm_sq.value();

  double lhs = 0.0;
  if (kind == EnvelopeKind::deleted_estimate) {
    lhs = 2.0 * dn * inputs.beta_4q_nm1 * inputs.beta_4q_nm1 + loss_term;
  } else {
    const double b2 = inputs.beta_4q_nm1 * inputs.beta_4q_nm1;
    const double gn2 = inputs.gamma_4q_n * inputs.gamma_4q_n;
    const double gnm12 = inputs.gamma_4q_nm1 * inputs.gamma_4q_nm1;
    lhs = 6.0 * dn * (gn2 + gnm12 + b2) + 2.0 * gn2 / dn + loss_term;
  }
  return replacement_proxy ? 4.0 * lhs : lhs;
}

EfronSteinReport efron_stein_check(std::span<const double> z_samples,
                                   std::span<const double> v_samples,
                                   std::span<const double> vdel_samples,
                                   double z_mc_variance_mean) {
  const std::size_t reps = z_samples.size();
  if (reps < 10 || v_samples.size() != reps || vdel_samples.size() != reps)
    throw std::invalid_argument("efron_stein_check: matched replication counts >= 10 required");

  EfronSteinReport report;
  report.var_z = sample_variance(z_samples) - z_mc_variance_mean;
  // delete-one jackknife of the variance
  {
    const double m = mean(z_samples);
    KahanSum sum_sq;
    for (double z : z_samples) sum_sq.add((z - m) * (z - m));
    std::vector<double> loo(reps, 0.0);
    const double r = static_cast<double>(reps);
    for (std::size_t i = 0; i < reps; ++i) {
      const double mean_loo = (r * m - z_samples[i]) / (r - 1.0);
      const double dev = z_samples[i] - m;
      const double ss_loo = sum_sq.value() - dev * dev -
                            (r - 1.0) * (mean_loo - m) * (mean_loo - m);
      loo[i] = std::max(0.0, ss_loo) / (r - 2.0);
    }
    report.var_z_se = jackknife_stderr(loo);
  }
  report.mean_v = mean(v_samples);
  report.mean_v_se = stderr_of_mean(v_samples);
  report.mean_vdel = mean(vdel_samples);
  report.mean_vdel_se = stderr_of_mean(vdel_samples);

  const double tol_left = 3.0 * std::sqrt(report.var_z_se * report.var_z_se +
                                          report.mean_v_se * report.mean_v_se);
  const double tol_right = 3.0 * std::sqrt(report.mean_v_se * report.mean_v_se +
                                           report.mean_vdel_se * report.mean_vdel_se);
  report.var_le_v = report.var_z <= report.mean_v + tol_left;
  report.v_le_vdel = report.mean_v <= report.mean_vdel + tol_right;
  report.pass = report.var_le_v && report.v_le_vdel;
  return report;
}

}  // namespace stabletail
