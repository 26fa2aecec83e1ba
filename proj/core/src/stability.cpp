#include "stabletail/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "stabletail/moments.hpp"
#include "stabletail/parallel.hpp"

namespace stabletail {

namespace {

// Scaled power sums backing the q-norm of one row, cached so that the
// delete-one-replication jackknife costs O(reps) instead of O(reps^2).
struct RowPowers {
  double scale = 0.0;
  std::vector<double> powers;  // (|x_r|/scale)^q
  double powsum = 0.0;         // compensated sum of powers
};

RowPowers row_powers(const std::vector<double>& row, double q) {
  RowPowers rp;
  for (double x : row) rp.scale = std::max(rp.scale, std::fabs(x));
  rp.powers.resize(row.size(), 0.0);
  if (rp.scale == 0.0) return rp;
  KahanSum acc;
  for (std::size_t r = 0; r < row.size(); ++r) {
    rp.powers[r] = std::pow(std::fabs(row[r]) / rp.scale, q);
    acc.add(rp.powers[r]);
  }
  rp.powsum = acc.value();
  return rp;
}

double norm_from_powsum(const RowPowers& rp, double powsum, double count, double q) {
  if (rp.scale == 0.0 || count <= 0.0) return 0.0;
  return rp.scale * std::pow(std::max(0.0, powsum) / count, 1.0 / q);
}

// value = sqrt((1/n) sum_i ||row_i||_q^2), with symmetric rules contributing
// a single row that stands in for every index.
double coefficient_value(const std::vector<std::vector<double>>& rows, double q) {
  KahanSum acc;
  for (const auto& row : rows) {
    const double norm = empirical_q_norm(row, q);
    acc.add(norm * norm);
  }
  return std::sqrt(acc.value() / static_cast<double>(rows.size()));
}

double coefficient_jackknife_se(const std::vector<std::vector<double>>& rows, double q) {
  const std::size_t reps = rows.empty() ? 0 : rows.front().size();
  if (reps < 2) return 0.0;
  std::vector<RowPowers> cached;
  cached.reserve(rows.size());
  for (const auto& row : rows) cached.push_back(row_powers(row, q));

  std::vector<double> loo(reps, 0.0);
  const double nrows = static_cast<double>(rows.size());
  for (std::size_t r = 0; r < reps; ++r) {
    KahanSum acc;
    for (const auto& rp : cached) {
      const double norm =
          norm_from_powsum(rp, rp.powsum - (rp.scale == 0.0 ? 0.0 : rp.powers[r]),
                           static_cast<double>(reps - 1), q);
      acc.add(norm * norm);
    }
    loo[r] = std::sqrt(acc.value() / nrows);
  }
  return jackknife_stderr(loo);
}

}  // namespace

double StabilitySweep::beta_value(double q) const { return coefficient_value(delta_test, q); }
double StabilitySweep::gamma_value(double q) const { return coefficient_value(delta_train, q); }
double StabilitySweep::beta_se(double q) const { return coefficient_jackknife_se(delta_test, q); }
double StabilitySweep::gamma_se(double q) const { return coefficient_jackknife_se(delta_train, q); }

std::vector<double> StabilitySweep::loss_norms(double order) const {
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(n));
  for (const auto& row : loss_at_removed) norms.push_back(empirical_q_norm(row, order));
  while (norms.size() < static_cast<std::size_t>(n)) norms.push_back(norms.front());
  return norms;
}

double StabilitySweep::loss_norm_sq_sum(double order) const {
  KahanSum acc;
  for (double norm : loss_norms(order)) acc.add(norm * norm);
  return acc.value();
}

double StabilitySweep::loss_norm_sq_sum_se(double order) const {
  const std::size_t count = loss_at_removed.empty() ? 0 : loss_at_removed.front().size();
  if (count < 2) return 0.0;
  std::vector<RowPowers> cached;
  cached.reserve(loss_at_removed.size());
  for (const auto& row : loss_at_removed) cached.push_back(row_powers(row, order));
  // symmetric rules carry one row standing in for all n indices
  const double multiplier =
      static_cast<double>(n) / static_cast<double>(loss_at_removed.size());

  std::vector<double> loo(count, 0.0);
  for (std::size_t r = 0; r < count; ++r) {
    KahanSum acc;
    for (const auto& rp : cached) {
      const double norm =
          norm_from_powsum(rp, rp.powsum - (rp.scale == 0.0 ? 0.0 : rp.powers[r]),
                           static_cast<double>(count - 1), order);
      acc.add(norm * norm);
    }
    loo[r] = multiplier * acc.value();
  }
  return jackknife_stderr(loo);
}

StabilityEstimate StabilitySweep::beta_estimate(int q) const {
  return {StabilityKind::beta, q, n, beta_value(q), beta_se(q), reps, seed};
}

StabilityEstimate StabilitySweep::gamma_estimate(int q) const {
  return {StabilityKind::gamma, q, n, gamma_value(q), gamma_se(q), reps, seed};
}

StabilitySweep stability_sweep(const LearningRule& rule, const Distribution& dist, int n,
                               int reps, const SeedStream& stream, int threads) {
  if (n < 2) throw std::invalid_argument("stability_sweep: n must be >= 2");
  if (reps < 2) throw std::invalid_argument("stability_sweep: reps must be >= 2");
  StabilitySweep sweep;
  sweep.n = n;
  sweep.reps = reps;
  sweep.symmetric = rule.symmetric();
  sweep.seed = stream.derive_seed();
  const std::size_t rows = sweep.symmetric ? 1 : static_cast<std::size_t>(n);
  sweep.delta_test.assign(rows, std::vector<double>(reps, 0.0));
  sweep.delta_train.assign(rows, std::vector<double>(reps, 0.0));
  sweep.loss_at_removed.assign(rows, std::vector<double>(reps, 0.0));

  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const SeedStream rep = stream.child(r);
    Rng data_rng = rep.child(0).rng();
    const Dataset sample = sample_dataset(dist, static_cast<std::size_t>(n), data_rng);
    Rng test_rng = rep.child(1).rng();
    const Example test_point = dist.sample(test_rng);

    const Hypothesis full = rule.fit(sample);
    const double full_test_loss = rule.loss(full, test_point);
    for (std::size_t i = 0; i < rows; ++i) {
      const Hypothesis reduced = rule.fit(sample.remove(i));
      const double reduced_removed_loss = rule.loss(reduced, sample[i]);
      sweep.delta_test[i][r] = full_test_loss - rule.loss(reduced, test_point);
      sweep.delta_train[i][r] = rule.loss(full, sample[i]) - reduced_removed_loss;
      sweep.loss_at_removed[i][r] = reduced_removed_loss;
    }
  });
  return sweep;
}

StabilityEstimate beta_q_mc(const LearningRule& rule, const Distribution& dist, int n,
                            int q, int reps, const SeedStream& stream, int threads) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  return stability_sweep(rule, dist, n, reps, stream, threads).beta_estimate(q);
}

StabilityEstimate gamma_q_mc(const LearningRule& rule, const Distribution& dist, int n,
                             int q, int reps, const SeedStream& stream, int threads) {
  if (q < 1) throw std::invalid_argument("invalid-order");
  return stability_sweep(rule, dist, n, reps, stream, threads).gamma_estimate(q);
}

double ridge_beta_q_bound(double b_x, double lambda, int n, double y_norm_2q_sq) {
  if (n <= 1) throw std::invalid_argument("ridge_beta_q_bound: n must be > 1");
  if (!(b_x > 0.0) || !(lambda > 0.0) || y_norm_2q_sq < 0.0)
    throw std::invalid_argument("ridge_beta_q_bound: bad parameters");
  const double s = lambda - 1.0 / static_cast<double>(n - 1);
  if (!(s > 0.0)) throw std::domain_error("stability-condition-violated");
  const double bx2 = b_x * b_x;
  return 2.0 * y_norm_2q_sq * (bx2 / (static_cast<double>(n) * lambda)) *
         (1.0 + (bx2 + lambda) / s) * (1.0 + bx2 / lambda);
}

double ridge_kappa(double b_x, double lambda, int n) {
  if (n <= 2) throw std::invalid_argument("ridge_kappa: n must be > 2");
  if (!(b_x > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("ridge_kappa: bad parameters");
  const double s = lambda - 1.0 / static_cast<double>(n - 2);
  if (!(s > 0.0)) throw std::domain_error("stability-condition-violated");
  const double bx2 = b_x * b_x;
  return 2.0 * (bx2 / lambda) * (1.0 + (bx2 + lambda) / s) * (1.0 + bx2 / lambda);
}

double ridge_kappa_hat(double b_x, double lambda, int n) {
  const double kappa = ridge_kappa(b_x, lambda, n);
  const double ratio = 1.0 + (b_x * b_x * b_x * b_x) / (lambda * lambda);
  return 8.0 * (kappa * kappa + 2.0 * ratio * ratio);
}

std::map<int, double> monotone_envelope(const std::map<int, double>& values_by_n) {
  std::map<int, double> envelope;
  double running_max = 0.0;
  bool first = true;
  for (auto it = values_by_n.rbegin(); it != values_by_n.rend(); ++it) {
    running_max = first ? it->second : std::max(running_max, it->second);
    first = false;
    envelope[it->first] = running_max;
  }
  return envelope;
}

std::string stability_profile_csv(const StabilityProfile& profile) {
  std::string out = "kind,q,n,value,stderr,reps,seed\n";
  char line[192];
  for (const auto& e : profile.entries) {
    std::snprintf(line, sizeof(line), "%s,%d,%d,%.17g,%.17g,%d,%llu\n",
                  e.kind == StabilityKind::beta ? "beta" : "gamma", e.q, e.n, e.value, e.se,
                  e.reps, static_cast<unsigned long long>(e.seed));
    out += line;
  }
  return out;
}

}  // namespace stabletail
