#include "stabletail/distributions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stabletail {

Dataset sample_dataset(const Distribution& dist, std::size_t n, Rng& rng) {
  std::vector<Example> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) examples.push_back(dist.sample(rng));
  return Dataset(std::move(examples));
}

RidgeBallDistribution::RidgeBallDistribution(std::size_t d, double b_x,
                                             std::vector<double> signal)
    : d_(d), b_x_(b_x), signal_(std::move(signal)) {
  if (d_ < 1) throw std::invalid_argument("ridge distribution: d must be >= 1");
  if (!(b_x_ > 0.0)) throw std::invalid_argument("ridge distribution: b_x must be positive");
  if (signal_.empty()) signal_.assign(d_, 0.0);
  if (signal_.size() != d_)
    throw std::invalid_argument("ridge distribution: signal dimension mismatch");
}

bool RidgeBallDistribution::pure_noise() const {
  for (double w : signal_)
    if (w != 0.0) return false;
  return true;
}

Example RidgeBallDistribution::sample(Rng& rng) const {
  // Fixed draw order: d direction normals, radius uniform, response normal.
  std::vector<double> x(d_);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      x[i] = rng.next_normal();
      norm_sq += x[i] * x[i];
    }
  } while (norm_sq == 0.0);
  const double radius = b_x_ * std::pow(rng.next_unit(), 1.0 / static_cast<double>(d_));
  const double rescale = radius / std::sqrt(norm_sq);
  double signal_term = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    x[i] *= rescale;
    signal_term += signal_[i] * x[i];
  }
  const double z = rng.next_normal();
  const double y = std::sqrt(std::fabs(z)) * (z < 0.0 ? -1.0 : 1.0) + signal_term;
  return RegressionExample{std::move(x), y};
}

std::string RidgeBallDistribution::descriptor() const {
  std::ostringstream os;
  os << "ridge-uniform-ball(d=" << d_ << ",b_x=" << b_x_
     << (pure_noise() ? ",pure-noise" : ",signal") << ")";
  return os.str();
}

SrnnUniformDistribution::SrnnUniformDistribution(double eta) : eta_(eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("srnn distribution: eta must lie in (0,1)");
}

Example SrnnUniformDistribution::sample(Rng& rng) const {
  const double x = rng.next_unit();
  const int label = rng.next_unit() < eta_ ? -1 : 1;
  return ClassificationExample{x, label};
}

std::string SrnnUniformDistribution::descriptor() const {
  std::ostringstream os;
  os << "srnn-uniform(eta=" << eta_ << ")";
  return os.str();
}

}  // namespace stabletail
