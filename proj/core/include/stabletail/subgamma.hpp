#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "stabletail/distributions.hpp"
#include "stabletail/moments.hpp"
#include "stabletail/rules.hpp"
#include "stabletail/seed.hpp"

namespace stabletail {

/// Moment-envelope pair: ||X||_{2q} <= sqrt(q u) v q w for all integer q >= 1.
struct SubGammaUW {
  double u = 0.0;
  double w = 0.0;
};

/// Sub-gamma variance factor / scale pair; the cumulant generating function
/// of a centered sub-gamma variable is bounded by lambda^2 v / (2(1 - c lambda)).
struct SubGammaVC {
  double v = 0.0;
  double c = 0.0;
};

/// Exact conversion v = 4(1.1 u + 0.53 w^2), c = 1.46 w.
SubGammaVC uw_to_vc(const SubGammaUW& uw);

/// Forward moment bound for variables passing the sub-gamma tail check:
/// ||X||_{2q} <= 10 (sqrt(q v) v q c).
double forward_moment_bound(int q, const SubGammaVC& vc);

/// Sharper constants of the same bound: sqrt(16.8 q v) v 9.6 q c.
double forward_moment_bound_tight(int q, const SubGammaVC& vc);

struct UwFitDiagnostics {
  double objective = 0.0;           // v + c after conversion (tightness heuristic)
  bool exact_u_match = false;       // profile equals sqrt(q u) for every q
  bool exact_w_match = false;       // profile equals q w for every q
  std::map<int, double> slack;      // envelope(q) - m_{2q}
};

struct UwFit {
  SubGammaUW uw;
  UwFitDiagnostics diagnostics;
};

/// Fits a feasible (u, w) envelope over the profiled integer orders.
///
/// A single-branch envelope matching the profile exactly is preferred when it
/// exists (it is the pointwise-tightest envelope of that form); otherwise the
/// two extreme candidates (u-only, w-only) and a one-dimensional sweep trading
/// u against w are searched for the smallest v + c after conversion. Any
/// feasible output is valid; the objective is a recorded heuristic.
UwFit fit_uw(const MomentProfile& profile);

struct TailCheckPoint {
  double t = 0.0;
  double radius = 0.0;      // sqrt(2 v t) + c t
  double exceedance = 0.0;  // max of the two one-sided empirical frequencies
  double target = 0.0;      // e^{-t}
  double se = 0.0;          // binomial standard error of the exceedance
  bool violated = false;    // exceedance > target + 3 se
};

/// Empirical two-sided exceedance of the sub-gamma tail radius over a t-grid.
std::vector<TailCheckPoint> tail_violation_rate(std::span<const double> centered_samples,
                                                const SubGammaVC& vc,
                                                std::span<const double> t_grid);

enum class ProxyKind { removal, replacement };
enum class ProxyInstantiation { deleted_estimate, true_risk };

/// One realization of an Efron-Stein variance proxy: the statistic z, its
/// n per-index variants, and proxy_value = sum_i (z - variant_i)^2 exactly.
struct ProxySamples {
  double z = 0.0;
  std::vector<double> variants;
  double proxy_value = 0.0;
  ProxyKind kind = ProxyKind::removal;
  ProxyInstantiation instantiation = ProxyInstantiation::deleted_estimate;
  double z_mc_variance = 0.0;  // variance of the Monte-Carlo estimate of z (0 when exact)
};

/// Removal proxy for the leave-one-out statistic: Z = R_DEL(A, S_n) and
/// Z_{-i} = (1/n) sum_{j != i} loss(A(S^{-i,-j}), X_j), i.e. (n-1)/n times the
/// leave-one-out estimate on S^{-i}. Costs O(n^2) fits.
ProxySamples vdel_for_deleted(const LearningRule& rule, const Dataset& data);

/// Removal proxy for the true risk: Z = R(A(S_n)) and Z_{-i} = R(A(S^{-i})),
/// all risks approximated on one shared test set of size m (common random
/// numbers keep the differences accurate).
ProxySamples vdel_for_risk(const LearningRule& rule, const Dataset& data,
                           const Distribution& dist, int m, const SeedStream& stream);

/// Replacement proxy: Z_i recomputes the statistic with slot i holding an
/// independent fresh example. dist/m/stream are required for the true-risk
/// instantiation only.
ProxySamples v_replacement(const LearningRule& rule, const Dataset& data,
                           const std::vector<Example>& fresh_examples,
                           ProxyInstantiation instantiation,
                           const Distribution* dist = nullptr, int m = 0,
                           const SeedStream* stream = nullptr);

/// Unbiased per-replication estimate of the conditional-variance proxy V of
/// the Efron-Stein chain Var[Z] <= E V <= E V_DEL: half the replacement sum
/// (E V = (1/2) sum_i E (Z - Z_i')^2), the removal sum itself otherwise.
double efron_stein_v_estimate(const ProxySamples& proxy);

/// Moment bound on the proxy of the leave-one-out statistic:
/// (2/n^2) sum_i norms_i^2 + 2 n beta^2 with norms at order 4q; the
/// replacement-proxy variant (used for unbounded losses) carries every
/// coefficient x4.
double proxy_moment_rhs_deleted(int q, int n, std::span<const double> loss_norms_4q,
                                double beta_4q_nm1, bool replacement_proxy);

/// Moment bound on the proxy of the true risk: n beta^2 (x4 for the
/// replacement variant).
double proxy_moment_rhs_risk(int q, int n, double beta_4q_n, bool replacement_proxy);

enum class EnvelopeKind { deleted_estimate, resubstitution };

struct EnvelopeInputs {
  double beta_4q_nm1 = 0.0;
  double gamma_4q_n = 0.0;    // resubstitution kind only
  double gamma_4q_nm1 = 0.0;  // resubstitution kind only
  std::vector<double> loss_norms_4q;
};

/// Left-hand side of the moment-envelope condition at order q: the quantity
/// that must stay below sqrt(q u_1) v q w_1. The replacement-proxy flag
/// multiplies the whole expression by 4 (the unbounded-loss route).
double envelope_lhs(EnvelopeKind kind, int q, int n, const EnvelopeInputs& inputs,
                    bool replacement_proxy);

struct EfronSteinReport {
  double var_z = 0.0;
  double var_z_se = 0.0;
  double mean_v = 0.0;
  double mean_v_se = 0.0;
  double mean_vdel = 0.0;
  double mean_vdel_se = 0.0;
  bool var_le_v = false;
  bool v_le_vdel = false;
  bool pass = false;
};

/// Checks the sandwich Var[Z] <= E V <= E V_DEL on matched replications,
/// flagging any ordering violation beyond 3 combined standard errors.
/// z_mc_variance_mean, when nonzero, is subtracted from the measured Var(Z)
/// to remove the Monte-Carlo noise of an estimated Z.
EfronSteinReport efron_stein_check(std::span<const double> z_samples,
                                   std::span<const double> v_samples,
                                   std::span<const double> vdel_samples,
                                   double z_mc_variance_mean = 0.0);

}  // namespace stabletail
