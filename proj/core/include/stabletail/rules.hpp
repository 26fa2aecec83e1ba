#pragma once

#include <string>
#include <variant>
#include <vector>

#include "stabletail/dataset.hpp"

namespace stabletail {

struct LinearModel {
  std::vector<double> weights;
};

struct SrnnModel {
  std::vector<double> inputs;
  std::vector<int> labels;
  double range = 0.0;
};

struct ConstantModel {
  double value = 0.0;
};

/// Deterministic predictor returned by a learning rule.
class Hypothesis {
 public:
  Hypothesis() : model_(ConstantModel{}) {}
  explicit Hypothesis(LinearModel m) : model_(std::move(m)) {}
  explicit Hypothesis(SrnnModel m) : model_(std::move(m)) {}
  explicit Hypothesis(ConstantModel m) : model_(m) {}

  /// Prediction for the example's input: a real for regression models, a
  /// +/-1 label for classifier models.
  double predict(const Example& e) const;

  const LinearModel* linear() const { return std::get_if<LinearModel>(&model_); }
  const SrnnModel* srnn() const { return std::get_if<SrnnModel>(&model_); }
  const ConstantModel* constant() const { return std::get_if<ConstantModel>(&model_); }

 private:
  std::variant<LinearModel, SrnnModel, ConstantModel> model_;
};

enum class LossRangeKind { unit_interval, bounded, unbounded };

struct LossRange {
  LossRangeKind kind = LossRangeKind::unbounded;
  double upper = 0.0;  // meaningful for kind == bounded

  static LossRange unit() { return {LossRangeKind::unit_interval, 1.0}; }
  static LossRange bounded_by(double m) { return {LossRangeKind::bounded, m}; }
  static LossRange unbounded() { return {LossRangeKind::unbounded, 0.0}; }
};

/// Fit-to-hypothesis abstraction: a deterministic map from samples of any
/// cardinality to hypotheses, plus the loss used to score them.
class LearningRule {
 public:
  virtual ~LearningRule() = default;

  virtual Hypothesis fit(const Dataset& data) const = 0;
  virtual double loss(const Hypothesis& h, const Example& e) const = 0;

  /// True when fitting any permutation of the sample yields the same
  /// predictor behaviour. Declared, not detected.
  virtual bool symmetric() const = 0;
  virtual LossRange loss_range() const = 0;
  virtual std::string name() const = 0;
};

/// Knobs of the ridge setup: the regularization, the covariate dimension and
/// the covariate norm bound the sampler guarantees.
struct RidgeConfig {
  double lambda = 1.0;
  std::size_t d = 1;
  double b_x = 1.0;
};

/// Penalized least-squares weights w = (X^T X + n*lambda*I)^{-1} X^T y,
/// solved with a Cholesky factorization of the (always SPD) regularized Gram
/// matrix. Note the n*lambda scaling of the penalty.
LinearModel ridge_fit(const Dataset& data, double lambda);

/// (w^T x - y)^2.
double squared_loss(const LinearModel& model, const Example& e);

/// Short-range nearest-neighbour classifier: recalls the nearest training
/// label when its input lies within `range`, and predicts +1 otherwise.
/// Nearest-neighbour ties break to the lowest index. The empty sample yields
/// the always-+1 classifier, which keeps leave-one-out on n = 1 well-defined.
Hypothesis srnn_fit(const Dataset& data, double range);

/// Misclassification indicator.
double zero_one_loss(const Hypothesis& h, const Example& e);

class RidgeRule final : public LearningRule {
 public:
  explicit RidgeRule(double lambda);
  explicit RidgeRule(const RidgeConfig& config) : RidgeRule(config.lambda) {}

  Hypothesis fit(const Dataset& data) const override;
  double loss(const Hypothesis& h, const Example& e) const override;
  bool symmetric() const override { return true; }
  LossRange loss_range() const override { return LossRange::unbounded(); }
  std::string name() const override { return "ridge"; }

  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

class SrnnRule final : public LearningRule {
 public:
  explicit SrnnRule(double range);

  Hypothesis fit(const Dataset& data) const override;
  double loss(const Hypothesis& h, const Example& e) const override;
  bool symmetric() const override { return true; }
  LossRange loss_range() const override { return LossRange::unit(); }
  std::string name() const override { return "srnn"; }

  double range() const { return range_; }

 private:
  double range_;
};

/// Fixed-output baseline whose loss is identically `value` on every example.
class ConstantLossRule final : public LearningRule {
 public:
  explicit ConstantLossRule(double value) : value_(value) {}

  Hypothesis fit(const Dataset&) const override { return Hypothesis(ConstantModel{0.0}); }
  double loss(const Hypothesis&, const Example&) const override { return value_; }
  bool symmetric() const override { return true; }
  LossRange loss_range() const override { return LossRange::bounded_by(value_); }
  std::string name() const override { return "constant"; }

 private:
  double value_;
};

/// Degenerate averaging baseline: predicts the mean response under squared
/// loss. Handy for hand-checkable leave-one-out arithmetic.
class MeanRule final : public LearningRule {
 public:
  Hypothesis fit(const Dataset& data) const override;
  double loss(const Hypothesis& h, const Example& e) const override;
  bool symmetric() const override { return true; }
  LossRange loss_range() const override { return LossRange::unbounded(); }
  std::string name() const override { return "mean"; }
};

}  // namespace stabletail
