#include "stabletail/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stabletail {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty-sample");
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean(xs);
  KahanSum acc;
  for (double x : xs) acc.add((x - m) * (x - m));
  return acc.value() / static_cast<double>(n - 1);
}

double stderr_of_mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty-sample");
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty-sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double empirical_q_norm(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("empty-sample");
  if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("invalid-order");
  double scale = 0.0;
  for (double x : samples) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0) return 0.0;
  KahanSum acc;
  for (double x : samples) acc.add(std::pow(std::fabs(x) / scale, q));
  const double mean_pow = acc.value() / static_cast<double>(samples.size());
  return scale * std::pow(mean_pow, 1.0 / q);
}

double jackknife_stderr(std::span<const double> leave_one_out_values) {
  const std::size_t r = leave_one_out_values.size();
  if (r < 2) return 0.0;
  const double m = mean(leave_one_out_values);
  KahanSum acc;
  for (double v : leave_one_out_values) acc.add((v - m) * (v - m));
  return std::sqrt(acc.value() * static_cast<double>(r - 1) / static_cast<double>(r));
}

MomentProfile empirical_moment_profile(std::span<const double> samples, int q_max) {
  if (q_max < 1) throw std::invalid_argument("invalid-order");
  MomentProfile profile;
  profile.sample_count = samples.size();
  for (int q = 1; q <= q_max; ++q)
    profile.m2q[q] = empirical_q_norm(samples, 2.0 * q);
  return profile;
}

double normal_abs_moment(int p) {
  if (p < 0) throw std::invalid_argument("invalid-order");
  if (p == 0) return 1.0;
  double m = (p % 2 == 0) ? 1.0 : std::sqrt(2.0 / std::numbers::pi);
  for (int k = (p % 2 == 0) ? 2 : 3; k <= p; k += 2) m *= static_cast<double>(k - 1);
  return m;
}

MomentProfile gaussian_response_fourth_moment_profile(int q_max) {
  if (q_max < 1) throw std::invalid_argument("invalid-order");
  MomentProfile profile;
  profile.sample_count = 0;  // analytic
  for (int q = 1; q <= q_max; ++q) {
    // ||Y^4||_{2q} = (E|Z|^{4q})^{1/(2q)}; stay in log space for large orders.
    double log_df = 0.0;
    for (int k = 1; k <= 4 * q - 1; k += 2) log_df += std::log(static_cast<double>(k));
    profile.m2q[q] = std::exp(log_df / (2.0 * q));
  }
  return profile;
}

double gaussian_response_norm2q_sq(int q) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  return std::pow(normal_abs_moment(q), 1.0 / q);
}

}  // namespace stabletail
