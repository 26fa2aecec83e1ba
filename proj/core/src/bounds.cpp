#include "stabletail/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "stabletail/stability.hpp"

namespace stabletail {

namespace {

double log_two_over(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must lie in (0,1)");
  return std::log(2.0 / delta);
}

void check_nonnegative(double value, const char* name) {
  if (value < 0.0 || !std::isfinite(value))
    throw std::invalid_argument(std::string(name) + " must be nonnegative and finite");
}

void check_a(double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("a must be positive and finite");
}

}  // namespace

double exp_efron_stein_radius(double e_vdel, const SubGammaVC& vc, double delta, double a) {
  check_nonnegative(e_vdel, "e_vdel");
  check_nonnegative(vc.v, "v");
  check_nonnegative(vc.c, "c");
  check_a(a);
  const double ell = log_two_over(delta);
  return 2.0 / 3.0 * (a * vc.c + 1.0 / a) * ell +
         2.0 * std::sqrt((e_vdel + a * a * vc.v / 2.0) * ell);
}

BoundReport deleted_tail_bound(double beta1_n, double beta2_nm1, double u1, double w1,
                               int n, double delta, double a) {
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  check_nonnegative(beta1_n, "beta1_n");
  check_nonnegative(beta2_nm1, "beta2_nm1");
  check_nonnegative(u1, "u1");
  check_nonnegative(w1, "w1");
  check_a(a);
  const double ell = log_two_over(delta);

  BoundReport report;
  report.kind = "deleted";
  report.delta = delta;
  report.a = a;
  report.inputs = {{"beta1_n", beta1_n}, {"beta2_nm1", beta2_nm1}, {"u1", u1},
                   {"w1", w1},           {"n", static_cast<double>(n)}};
  report.c1 = 2.2 * a * a * u1 + 1.07 * a * a * w1 * w1;
  report.c2 = 4.0 / 3.0 * (1.46 * a * w1 + 1.0 / a);
  report.radius =
      beta1_n +
      4.0 * std::sqrt((static_cast<double>(n) * beta2_nm1 * beta2_nm1 + report.c1) * ell) +
      report.c2 * ell;
  report.sidedness = "two-sided";
  report.coverage_target = 2.0 * delta;
  return report;
}

double deleted_tail_bound_simplified(double beta1_n, double beta2_nm1, double u1,
                                     double w1, int n, double delta) {
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  check_nonnegative(beta1_n, "beta1_n");
  check_nonnegative(beta2_nm1, "beta2_nm1");
  check_nonnegative(u1, "u1");
  check_nonnegative(w1, "w1");
  if (!(delta > 0.0) || delta > std::exp(-1.0))
    throw std::domain_error("simplified-form-requires-small-delta");
  const double ell = std::log(2.0 / delta);
  return beta1_n +
         4.0 * std::sqrt(static_cast<double>(n) * beta2_nm1 * beta2_nm1 * ell) +
         8.0 *
             std::sqrt(1.0 / 3.0 *
                       (std::sqrt(2.2 * u1 + 1.07 * w1 * w1) + 1.0 / 3.0 * 1.46 * w1)) *
             ell;
}

double uniform_stability_bound(double beta_u, double loss_upper, int n, double delta) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  check_nonnegative(beta_u, "beta_u");
  if (!(loss_upper > 0.0)) throw std::invalid_argument("M must be positive");
  const double ell = log_two_over(delta);
  const double root = std::sqrt(ell / (2.0 * static_cast<double>(n)));
  return beta_u + 4.0 * static_cast<double>(n) * beta_u * root + loss_upper * root;
}

BoundReport resubstitution_tail_bound(double beta1_n, double gamma1_n, double beta2_nm1,
                                      double u1, double w1, int n, double delta, double a) {
  check_nonnegative(gamma1_n, "gamma1_n");
  // Same tail terms as the deleted-estimate bound; gamma_1(n) is additive, so
  // the gamma_1 = 0 case reproduces it bit for bit.
  BoundReport report = deleted_tail_bound(beta1_n, beta2_nm1, u1, w1, n, delta, a);
  report.kind = "resubstitution";
  report.inputs["gamma1_n"] = gamma1_n;
  report.radius += gamma1_n;
  return report;
}

BoundReport ridge_deleted_tail_bound(double b_x, double lambda, int n, double mu,
                                     double u_y, double w_y, double delta) {
  check_nonnegative(mu, "mu");
  check_nonnegative(u_y, "u_y");
  check_nonnegative(w_y, "w_y");
  const double ell = log_two_over(delta);
  const double kappa = ridge_kappa(b_x, lambda, n);
  const double kappa_hat = ridge_kappa_hat(b_x, lambda, n);
  const double dn = static_cast<double>(n);

  BoundReport report;
  report.kind = "ridge-closed-form";
  report.delta = delta;
  report.inputs = {{"b_x", b_x}, {"lambda", lambda}, {"n", dn},
                   {"mu", mu},   {"u_y", u_y},       {"w_y", w_y}};
  report.kappa = kappa;
  report.kappa_hat = kappa_hat;
  report.radius =
      kappa * mu / dn + 4.0 * kappa * mu * std::sqrt(dn / ((dn - 1.0) * (dn - 1.0)) * ell) +
      8.0 *
          std::sqrt(kappa_hat / (3.0 * (dn - 1.0)) *
                    (std::sqrt(2.2 * u_y + 1.07 * w_y * w_y) + 1.0 / 3.0 * 1.46 * w_y)) *
          ell;
  report.sidedness = "two-sided";
  report.coverage_target = delta;
  return report;
}

OptimizeAResult optimize_a(const std::function<double(double)>& radius_at, double a_lo,
                           double a_hi, std::optional<double> w1) {
  if (!(a_lo > 0.0) || !(a_hi > a_lo)) throw std::invalid_argument("empty range");

  // Coarse log grid to bracket the minimum, guarding pathological inputs.
  constexpr int kGridPoints = 61;
  const double log_lo = std::log(a_lo);
  const double log_hi = std::log(a_hi);
  int best_index = 0;
  double best_value = 0.0;
  auto grid_a = [&](int i) {
    return std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) / (kGridPoints - 1));
  };
  for (int i = 0; i < kGridPoints; ++i) {
    const double value = radius_at(grid_a(i));
    if (i == 0 || value < best_value) {
      best_value = value;
      best_index = i;
    }
  }
  double lo = std::log(grid_a(std::max(0, best_index - 1)));
  double hi = std::log(grid_a(std::min(kGridPoints - 1, best_index + 1)));

  // Golden-section refinement on log a.
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = radius_at(std::exp(x1));
  double f2 = radius_at(std::exp(x2));
  while (hi - lo > 1e-4) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = radius_at(std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = radius_at(std::exp(x2));
    }
  }

  OptimizeAResult result;
  result.a = std::exp(0.5 * (lo + hi));
  result.radius = radius_at(result.a);
  if (result.radius > best_value) {  // grid point won; keep it
    result.a = grid_a(best_index);
    result.radius = best_value;
  }
  if (w1 && *w1 > 0.0) {
    result.heuristic_a = 1.0 / std::sqrt(*w1);
    result.heuristic_radius = radius_at(*result.heuristic_a);
  }
  return result;
}

}  // namespace stabletail
