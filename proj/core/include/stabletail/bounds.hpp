#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "stabletail/subgamma.hpp"

namespace stabletail {

/// Everything that went into one bound evaluation: inputs, intermediate
/// constants and the final high-probability radius.
struct BoundReport {
  std::string kind;  // deleted | resubstitution | uniform-baseline | ridge-closed-form | ...
  double delta = 0.0;
  std::optional<double> a;  // free parameter; absent where the formula has none
  std::map<std::string, double> inputs;
  double c1 = 0.0;
  double c2 = 0.0;
  std::optional<double> kappa;
  std::optional<double> kappa_hat;
  double radius = 0.0;
  std::string sidedness = "two-sided";
  double coverage_target = 0.0;  // probability mass allowed outside the radius
  std::optional<double> heuristic_a;
  std::optional<double> heuristic_radius;
};

/// Generic exponential Efron-Stein deviation radius for a statistic whose
/// removal proxy has mean e_vdel and sub-gamma parameters (v, c):
/// (2/3)(a c + 1/a) log(2/delta) + 2 sqrt((e_vdel + a^2 v / 2) log(2/delta)).
double exp_efron_stein_radius(double e_vdel, const SubGammaVC& vc, double delta, double a);

/// Tail bound for the deleted estimate, two-sided at confidence 1 - 2 delta:
/// beta_1(n) + 4 sqrt((n beta_2^2(n-1) + C1) log(2/delta)) + C2 log(2/delta)
/// with C1 = 2.2 a^2 u1 + 1.07 a^2 w1^2 and C2 = (4/3)(1.46 a w1 + 1/a).
BoundReport deleted_tail_bound(double beta1_n, double beta2_nm1, double u1, double w1,
                               int n, double delta, double a);

/// Simplified form of the deleted-estimate bound (free parameter folded in);
/// requires delta <= 1/e.
double deleted_tail_bound_simplified(double beta1_n, double beta2_nm1, double u1,
                                     double w1, int n, double delta);

/// Classical uniform-stability baseline, at confidence 1 - delta:
/// beta_u + 4 n beta_u sqrt(log(2/delta)/(2n)) + M sqrt(log(2/delta)/(2n)).
double uniform_stability_bound(double beta_u, double loss_upper, int n, double delta);

/// Tail bound for the resubstitution estimate: the deleted-estimate radius
/// plus gamma_1(n), with (u1, w1) taken from the resubstitution envelope.
BoundReport resubstitution_tail_bound(double beta1_n, double gamma1_n, double beta2_nm1,
                                      double u1, double w1, int n, double delta, double a);

/// Closed-form deleted-estimate bound for ridge regression with unbounded
/// responses, at confidence 1 - delta:
/// kappa mu / n + 4 kappa mu sqrt(n/(n-1)^2 log(2/delta))
///   + 8 sqrt(kappa_hat/(3(n-1)) (sqrt(2.2 u_y + 1.07 w_y^2) + 1.46 w_y / 3))
///     log(2/delta).
BoundReport ridge_deleted_tail_bound(double b_x, double lambda, int n, double mu,
                                     double u_y, double w_y, double delta);

struct OptimizeAResult {
  double a = 1.0;
  double radius = 0.0;
  std::optional<double> heuristic_a;       // w1^{-1/2}, when supplied
  std::optional<double> heuristic_radius;
};

/// Minimizes a radius evaluator over the free parameter a on a log grid
/// refined by golden-section search (relative tolerance 1e-4). When w1 > 0 is
/// supplied, the w1^{-1/2} heuristic is evaluated alongside for comparison.
OptimizeAResult optimize_a(const std::function<double(double)>& radius_at, double a_lo = 1e-3,
                           double a_hi = 1e3, std::optional<double> w1 = std::nullopt);

}  // namespace stabletail
