#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace stabletail {

/// Kahan compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - compensation_;
    const double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double mean(std::span<const double> xs);

/// Unbiased sample variance (denominator n-1); 0 for fewer than two samples.
double sample_variance(std::span<const double> xs);

/// Standard error of the sample mean.
double stderr_of_mean(std::span<const double> xs);

/// Median; works on a copy.
double median(std::vector<double> xs);

/// Empirical q-norm ((1/m) sum |x_i|^q)^(1/q).
///
/// The powers are computed on max-scaled magnitudes with compensated
/// summation, which keeps orders up to q ~ 32 accurate and overflow-free.
double empirical_q_norm(std::span<const double> samples, double q);

/// Delete-one jackknife standard error from the leave-one-out values of a
/// statistic.
double jackknife_stderr(std::span<const double> leave_one_out_values);

/// Empirical 2q-norms of a scalar random variable, indexed by integer q >= 1.
/// The substrate for sub-gamma envelope fitting.
struct MomentProfile {
  std::map<int, double> m2q;  // q -> ||X||_{2q}
  std::size_t sample_count = 0;
};

MomentProfile empirical_moment_profile(std::span<const double> samples, int q_max);

/// E|Z|^p for standard normal Z and integer p >= 0 (exact recursion
/// E|Z|^p = (p-1) E|Z|^{p-2}, E|Z|^0 = 1, E|Z|^1 = sqrt(2/pi)).
double normal_abs_moment(int p);

/// ||Y^4||_{2q} profile for the pure-noise response Y = sqrt(|Z|) sgn(Z):
/// since Y^4 = Z^2, the entry at q equals ((4q-1)!!)^(1/(2q)).
MomentProfile gaussian_response_fourth_moment_profile(int q_max);

/// ||Y||_{2q}^2 for the same response, i.e. (E|Z|^q)^(1/q).
double gaussian_response_norm2q_sq(int q);

}  // namespace stabletail
