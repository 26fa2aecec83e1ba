#pragma once

#include <string>
#include <vector>

#include "stabletail/dataset.hpp"
#include "stabletail/rules.hpp"
#include "stabletail/seed.hpp"

namespace stabletail {

/// Example-generating distribution; draws from one Rng stream are i.i.d.
class Distribution {
 public:
  virtual ~Distribution() = default;
  virtual Example sample(Rng& rng) const = 0;
  virtual std::string descriptor() const = 0;
};

Dataset sample_dataset(const Distribution& dist, std::size_t n, Rng& rng);

/// Covariates uniform on the radius-b_x ball, response sqrt(|Z|) sgn(Z) plus
/// an optional linear signal (default zero, matching the pure-noise setup
/// whose fourth-moment profile the Gaussian oracle supplies analytically).
class RidgeBallDistribution final : public Distribution {
 public:
  RidgeBallDistribution(std::size_t d, double b_x, std::vector<double> signal = {});
  explicit RidgeBallDistribution(const RidgeConfig& config, std::vector<double> signal = {})
      : RidgeBallDistribution(config.d, config.b_x, std::move(signal)) {}

  Example sample(Rng& rng) const override;
  std::string descriptor() const override;

  std::size_t d() const { return d_; }
  double b_x() const { return b_x_; }
  const std::vector<double>& signal() const { return signal_; }
  bool pure_noise() const;

 private:
  std::size_t d_;
  double b_x_;
  std::vector<double> signal_;
};

/// Uniform input on [0,1]; label -1 with probability eta, independent of the
/// input. eta parametrizes the negative-label mass that enters the risk
/// lower bound of the short-range nearest-neighbour demonstration.
class SrnnUniformDistribution final : public Distribution {
 public:
  explicit SrnnUniformDistribution(double eta);

  Example sample(Rng& rng) const override;
  std::string descriptor() const override;

  double eta() const { return eta_; }

 private:
  double eta_;
};

}  // namespace stabletail
