#include "stabletail/dataset.hpp"

#include <stdexcept>
#include <utility>

namespace stabletail {

bool same_payload_kind(const Example& a, const Example& b) {
  return a.index() == b.index();
}

Dataset::Dataset(std::vector<Example> examples) : examples_(std::move(examples)) {
  validate();
}

void Dataset::validate() {
  bool saw_regression = false;
  bool saw_classification = false;
  std::size_t d = 0;
  for (const auto& e : examples_) {
    if (const auto* r = std::get_if<RegressionExample>(&e)) {
      if (!saw_regression) {
        d = r->x.size();
        saw_regression = true;
      } else if (r->x.size() != d) {
        throw std::invalid_argument("dataset: regression payloads must share dimension");
      }
    } else {
      const auto& c = std::get<ClassificationExample>(e);
      if (c.x < 0.0 || c.x > 1.0)
        throw std::invalid_argument("dataset: classification input outside [0,1]");
      if (c.label != 1 && c.label != -1)
        throw std::invalid_argument("dataset: label must be -1 or +1");
      saw_classification = true;
    }
  }
  if (saw_regression && saw_classification)
    throw std::invalid_argument("dataset: mixed payload kinds");
  dimension_ = saw_regression ? d : 0;
}

const Example& Dataset::operator[](std::size_t i) const {
  if (i >= examples_.size()) throw std::out_of_range("bad-index");
  return examples_[i];
}

Dataset Dataset::remove(std::size_t i) const {
  if (i >= examples_.size()) throw std::out_of_range("bad-index");
  std::vector<Example> rest;
  rest.reserve(examples_.size() - 1);
  for (std::size_t k = 0; k < examples_.size(); ++k)
    if (k != i) rest.push_back(examples_[k]);
  Dataset out;
  out.examples_ = std::move(rest);
  out.dimension_ = dimension_;
  return out;
}

Dataset Dataset::remove2(std::size_t i, std::size_t j) const {
  if (i == j) throw std::invalid_argument("duplicate-index");
  if (i >= examples_.size() || j >= examples_.size()) throw std::out_of_range("bad-index");
  std::vector<Example> rest;
  rest.reserve(examples_.size() - 2);
  for (std::size_t k = 0; k < examples_.size(); ++k)
    if (k != i && k != j) rest.push_back(examples_[k]);
  Dataset out;
  out.examples_ = std::move(rest);
  out.dimension_ = dimension_;
  return out;
}

Dataset Dataset::replace(std::size_t i, Example e) const {
  if (i >= examples_.size()) throw std::out_of_range("bad-index");
  if (!same_payload_kind(examples_[i], e))
    throw std::invalid_argument("replace: payload kind mismatch");
  if (const auto* r = std::get_if<RegressionExample>(&e)) {
    if (r->x.size() != dimension_)
      throw std::invalid_argument("replace: dimension mismatch");
  }
  std::vector<Example> items = examples_;
  items[i] = std::move(e);
  Dataset out;
  out.examples_ = std::move(items);
  out.dimension_ = dimension_;
  out.validate();
  return out;
}

bool Dataset::regression() const {
  return !examples_.empty() && std::holds_alternative<RegressionExample>(examples_.front());
}

bool Dataset::classification() const {
  return !examples_.empty() && std::holds_alternative<ClassificationExample>(examples_.front());
}

}  // namespace stabletail
