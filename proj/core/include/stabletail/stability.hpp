#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stabletail/distributions.hpp"
#include "stabletail/rules.hpp"
#include "stabletail/seed.hpp"

namespace stabletail {

enum class StabilityKind { beta, gamma };

struct StabilityEstimate {
  StabilityKind kind = StabilityKind::beta;
  int q = 1;
  int n = 0;
  double value = 0.0;
  double se = 0.0;  // delete-one-replication jackknife standard error
  int reps = 0;
  std::uint64_t seed = 0;
};

/// One Monte-Carlo replication set for stability estimation at sample size n.
///
/// Each replication draws a fresh (S_n, X) pair and records, per removal
/// index i, the loss change at the independent test point (beta), the loss
/// change at the removed training point (gamma), and the removed-point loss
/// itself (the norms entering the moment-envelope left-hand sides). Symmetric
/// rules evaluate i = 1 only, which the definition reduces to; nonsymmetric
/// rules pay the full n-fold cost.
///
/// All orders q are evaluated on the same fixed draws, so monotonicity of the
/// empirical q-norm in q carries over to the estimates exactly.
class StabilitySweep {
 public:
  int n = 0;
  int reps = 0;
  bool symmetric = true;
  std::uint64_t seed = 0;

  // rows: one per evaluated removal index (a single row for symmetric rules);
  // columns: replications.
  std::vector<std::vector<double>> delta_test;
  std::vector<std::vector<double>> delta_train;
  std::vector<std::vector<double>> loss_at_removed;

  double beta_value(double q) const;
  double gamma_value(double q) const;
  double beta_se(double q) const;
  double gamma_se(double q) const;

  /// Per-removal-index norms ||loss(A(S^{-i}), X_i)||_order, n entries
  /// (symmetric rules replicate the single evaluated row).
  std::vector<double> loss_norms(double order) const;

  /// sum_i ||loss(A(S^{-i}), X_i)||_order^2 and its jackknife stderr.
  double loss_norm_sq_sum(double order) const;
  double loss_norm_sq_sum_se(double order) const;

  StabilityEstimate beta_estimate(int q) const;
  StabilityEstimate gamma_estimate(int q) const;
};

StabilitySweep stability_sweep(const LearningRule& rule, const Distribution& dist, int n,
                               int reps, const SeedStream& stream, int threads = 1);

/// L_q stability coefficient beta_q(n): root of the average squared q-norm of
/// the loss change caused by one removal, evaluated at an independent point.
StabilityEstimate beta_q_mc(const LearningRule& rule, const Distribution& dist, int n,
                            int q, int reps, const SeedStream& stream, int threads = 1);

/// Resubstitution stability coefficient gamma_q(n): the same construction
/// evaluated at the removed training point itself.
StabilityEstimate gamma_q_mc(const LearningRule& rule, const Distribution& dist, int n,
                             int q, int reps, const SeedStream& stream, int threads = 1);

/// Closed-form upper bound on the ridge L_q stability coefficient:
/// 2 ||Y||_{2q}^2 (b_x^2/(n lambda)) (1 + (b_x^2+lambda)/s) (1 + b_x^2/lambda)
/// with s = lambda - 1/(n-1), valid while s > 0.
double ridge_beta_q_bound(double b_x, double lambda, int n, double y_norm_2q_sq);

/// kappa = 2 (b_x^2/lambda) (1 + (b_x^2+lambda)/s) (1 + b_x^2/lambda) with
/// s = lambda - 1/(n-2); depends on (b_x, lambda) only as n grows.
double ridge_kappa(double b_x, double lambda, int n);

/// kappa_hat = 8 (kappa^2 + 2 (1 + b_x^4/lambda^2)^2).
double ridge_kappa_hat(double b_x, double lambda, int n);

/// Running maximum from the largest n downward: the least nonincreasing-in-n
/// map dominating the input.
std::map<int, double> monotone_envelope(const std::map<int, double>& values_by_n);

struct StabilityProfile {
  std::vector<StabilityEstimate> entries;  // ordered (kind, q, n)
  bool monotone_envelope_applied = false;
};

/// CSV with header kind,q,n,value,stderr,reps,seed (LF newlines).
std::string stability_profile_csv(const StabilityProfile& profile);

}  // namespace stabletail
