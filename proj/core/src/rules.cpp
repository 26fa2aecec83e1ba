#include "stabletail/rules.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stabletail/moments.hpp"

namespace stabletail {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension-mismatch");
  KahanSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

// Cholesky solve of an SPD system; `g` is row-major d x d, overwritten.
std::vector<double> spd_solve(std::vector<double> g, std::vector<double> rhs, std::size_t d) {
  // factor g = L L^T in place (lower triangle)
  for (std::size_t j = 0; j < d; ++j) {
    double diag = g[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= g[j * d + k] * g[j * d + k];
    if (!(diag > 0.0)) throw std::runtime_error("ridge_fit: gram matrix not positive definite");
    const double ljj = std::sqrt(diag);
    g[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = g[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= g[i * d + k] * g[j * d + k];
      g[i * d + j] = v / ljj;
    }
  }
  // forward substitution L z = rhs
  for (std::size_t i = 0; i < d; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= g[i * d + k] * rhs[k];
    rhs[i] = v / g[i * d + i];
  }
  // back substitution L^T w = z
  for (std::size_t ii = d; ii-- > 0;) {
    double v = rhs[ii];
    for (std::size_t k = ii + 1; k < d; ++k) v -= g[k * d + ii] * rhs[k];
    rhs[ii] = v / g[ii * d + ii];
  }
  return rhs;
}

}  // namespace

double Hypothesis::predict(const Example& e) const {
  if (const auto* lin = std::get_if<LinearModel>(&model_)) {
    const auto* r = std::get_if<RegressionExample>(&e);
    if (!r) throw std::invalid_argument("predict: linear model needs a regression example");
    return dot(lin->weights, r->x);
  }
  if (const auto* nn = std::get_if<SrnnModel>(&model_)) {
    const auto* c = std::get_if<ClassificationExample>(&e);
    if (!c) throw std::invalid_argument("predict: classifier needs a classification example");
    if (nn->inputs.empty()) return 1.0;
    std::size_t best = 0;
    double best_dist = std::fabs(nn->inputs[0] - c->x);
    for (std::size_t i = 1; i < nn->inputs.size(); ++i) {
      const double dist = std::fabs(nn->inputs[i] - c->x);
      if (dist < best_dist) {  // strict: ties keep the lowest index
        best_dist = dist;
        best = i;
      }
    }
    return best_dist <= nn->range ? static_cast<double>(nn->labels[best]) : 1.0;
  }
  return std::get<ConstantModel>(model_).value;
}

LinearModel ridge_fit(const Dataset& data, double lambda) {
  if (data.empty()) throw std::invalid_argument("ridge_fit: empty dataset");
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_fit: lambda must be positive");
  if (!data.regression()) throw std::invalid_argument("ridge_fit: needs regression payloads");
  const std::size_t d = data.dimension();
  const std::size_t n = data.size();

  std::vector<double> gram(d * d, 0.0);
  std::vector<double> rhs(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = std::get<RegressionExample>(data[k]);
    for (std::size_t i = 0; i < d; ++i) {
      rhs[i] += r.y * r.x[i];
      for (std::size_t j = 0; j <= i; ++j) gram[i * d + j] += r.x[i] * r.x[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) gram[i * d + j] = gram[j * d + i];
    gram[i * d + i] += static_cast<double>(n) * lambda;
  }
  return LinearModel{spd_solve(std::move(gram), std::move(rhs), d)};
}

double squared_loss(const LinearModel& model, const Example& e) {
  const auto* r = std::get_if<RegressionExample>(&e);
  if (!r) throw std::invalid_argument("squared_loss: needs a regression example");
  const double residual = dot(model.weights, r->x) - r->y;
  return residual * residual;
}

Hypothesis srnn_fit(const Dataset& data, double range) {
  if (!(range >= 0.0)) throw std::invalid_argument("srnn_fit: range must be nonnegative");
  if (!data.empty() && !data.classification())
    throw std::invalid_argument("srnn_fit: needs classification payloads");
  SrnnModel model;
  model.range = range;
  model.inputs.reserve(data.size());
  model.labels.reserve(data.size());
  for (const auto& e : data.examples()) {
    const auto& c = std::get<ClassificationExample>(e);
    model.inputs.push_back(c.x);
    model.labels.push_back(c.label);
  }
  return Hypothesis(std::move(model));
}

double zero_one_loss(const Hypothesis& h, const Example& e) {
  const auto* c = std::get_if<ClassificationExample>(&e);
  if (!c) throw std::invalid_argument("zero_one_loss: needs a classification example");
  const double prediction = h.predict(e);
  return (prediction > 0) == (c->label > 0) ? 0.0 : 1.0;
}

RidgeRule::RidgeRule(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
}

Hypothesis RidgeRule::fit(const Dataset& data) const {
  return Hypothesis(ridge_fit(data, lambda_));
}

double RidgeRule::loss(const Hypothesis& h, const Example& e) const {
  const auto* lin = h.linear();
  if (!lin) throw std::invalid_argument("ridge loss: hypothesis is not linear");
  return squared_loss(*lin, e);
}

SrnnRule::SrnnRule(double range) : range_(range) {
  if (!(range >= 0.0)) throw std::invalid_argument("srnn: range must be nonnegative");
}

Hypothesis SrnnRule::fit(const Dataset& data) const { return srnn_fit(data, range_); }

double SrnnRule::loss(const Hypothesis& h, const Example& e) const {
  return zero_one_loss(h, e);
}

Hypothesis MeanRule::fit(const Dataset& data) const {
  if (data.empty()) return Hypothesis(ConstantModel{0.0});
  if (!data.regression()) throw std::invalid_argument("mean rule: needs regression payloads");
  KahanSum acc;
  for (const auto& e : data.examples()) acc.add(std::get<RegressionExample>(e).y);
  return Hypothesis(ConstantModel{acc.value() / static_cast<double>(data.size())});
}

double MeanRule::loss(const Hypothesis& h, const Example& e) const {
  const auto* r = std::get_if<RegressionExample>(&e);
  if (!r) throw std::invalid_argument("mean rule loss: needs a regression example");
  const double residual = h.predict(e) - r->y;
  return residual * residual;
}

}  // namespace stabletail
