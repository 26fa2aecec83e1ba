#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace stabletail {

struct RegressionExample {
  std::vector<double> x;
  double y = 0.0;
};

struct ClassificationExample {
  double x = 0.0;  // input in [0, 1]
  int label = 1;   // -1 or +1
};

using Example = std::variant<RegressionExample, ClassificationExample>;

bool same_payload_kind(const Example& a, const Example& b);

/// Immutable ordered sample. Removal and replacement return fresh values and
/// never mutate the source. Indices are 0-based throughout the C++ API.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Example> examples);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  const Example& operator[](std::size_t i) const;

  /// Sample with element i removed; order of the rest is preserved.
  Dataset remove(std::size_t i) const;

  /// Sample with elements i and j removed; symmetric in (i, j).
  Dataset remove2(std::size_t i, std::size_t j) const;

  /// Sample with slot i holding `e`; payload kinds must match.
  Dataset replace(std::size_t i, Example e) const;

  /// Dimension shared by regression payloads; 0 for classification or empty.
  std::size_t dimension() const { return dimension_; }

  bool regression() const;
  bool classification() const;

  const std::vector<Example>& examples() const { return examples_; }

 private:
  void validate();

  std::vector<Example> examples_;
  std::size_t dimension_ = 0;
};

}  // namespace stabletail
