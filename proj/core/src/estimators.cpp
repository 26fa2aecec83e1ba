#include "stabletail/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "stabletail/moments.hpp"
#include "stabletail/parallel.hpp"

namespace stabletail {

double resubstitution(const LearningRule& rule, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("empty-sample");
  const Hypothesis h = rule.fit(data);
  KahanSum acc;
  for (const auto& e : data.examples()) acc.add(rule.loss(h, e));
  return acc.value() / static_cast<double>(data.size());
}

double deleted(const LearningRule& rule, const Dataset& data) {
  if (data.size() < 2) throw std::invalid_argument("needs-two-examples");
  KahanSum acc;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Hypothesis h = rule.fit(data.remove(i));
    acc.add(rule.loss(h, data[i]));
  }
  return acc.value() / static_cast<double>(data.size());
}

McRisk mc_risk(const LearningRule& rule, const Hypothesis& h, const Distribution& dist,
               int m, const SeedStream& stream) {
  if (m < 1) throw std::invalid_argument("mc_risk: m must be >= 1");
  Rng rng = stream.rng();
  std::vector<double> losses(static_cast<std::size_t>(m));
  for (auto& loss : losses) loss = rule.loss(h, dist.sample(rng));
  const double mean_loss = mean(losses);
  // two-pass variance: exactly zero for a literally constant loss
  double variance = 0.0;
  if (m > 1) variance = sample_variance(losses);
  return {mean_loss, std::sqrt(variance / static_cast<double>(m))};
}

std::vector<GapSample> gap_samples(const LearningRule& rule, const Distribution& dist,
                                   int n, int reps, int test_m, const SeedStream& stream,
                                   int threads) {
  if (reps < 1) throw std::invalid_argument("gap_samples: reps must be >= 1");
  if (n < 2) throw std::invalid_argument("needs-two-examples");
  std::vector<GapSample> out(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const SeedStream rep = stream.child(r);
    Rng data_rng = rep.child(0).rng();
    const Dataset sample = sample_dataset(dist, static_cast<std::size_t>(n), data_rng);

    const Hypothesis h = rule.fit(sample);
    KahanSum res_acc;
    for (const auto& e : sample.examples()) res_acc.add(rule.loss(h, e));
    const double res = res_acc.value() / static_cast<double>(n);
    const double del = deleted(rule, sample);
    const McRisk risk = mc_risk(rule, h, dist, test_m, rep.child(1));

    GapSample& slot = out[r];
    slot.triple = {res, del, risk.value, risk.se, n, test_m};
    slot.gap_del = std::fabs(del - risk.value);
    slot.gap_res = std::fabs(res - risk.value);
  });
  return out;
}

}  // namespace stabletail
