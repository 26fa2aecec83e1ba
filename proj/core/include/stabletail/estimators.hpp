#pragma once

#include <vector>

#include "stabletail/distributions.hpp"
#include "stabletail/rules.hpp"
#include "stabletail/seed.hpp"

namespace stabletail {

/// Training error: (1/n) sum_i loss(A(S_n), X_i); a single fit.
double resubstitution(const LearningRule& rule, const Dataset& data);

/// Leave-one-out estimate: (1/n) sum_i loss(A(S_n^{-i}), X_i); exactly n fits
/// on samples of size n-1, recomputed from scratch.
double deleted(const LearningRule& rule, const Dataset& data);

struct McRisk {
  double value = 0.0;
  double se = 0.0;  // replication standard error of the mean
};

/// Risk of a fixed hypothesis approximated on m fresh i.i.d. draws.
McRisk mc_risk(const LearningRule& rule, const Hypothesis& h, const Distribution& dist,
               int m, const SeedStream& stream);

struct RiskTriple {
  double resubstitution = 0.0;
  double deleted = 0.0;
  double mc_risk = 0.0;
  double mc_risk_se = 0.0;
  int n = 0;
  int test_m = 0;
};

struct GapSample {
  double gap_del = 0.0;  // |R_DEL - R|
  double gap_res = 0.0;  // |R_RES - R|
  RiskTriple triple;
};

/// One fresh sample per replication: both estimates plus an independent
/// test-set approximation of the true risk. Output is ordered by replication
/// index and independent of the execution schedule.
std::vector<GapSample> gap_samples(const LearningRule& rule, const Distribution& dist,
                                   int n, int reps, int test_m, const SeedStream& stream,
                                   int threads = 1);

}  // namespace stabletail
