#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urc/errors.hpp"

namespace urc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Point on the probability simplex over n >= 2 classes.
///
/// Construction accepts entries whose sum deviates from 1 by at most 1e-6
/// (guarding against accumulated float drift, not bad data) and renormalizes;
/// anything further off is rejected. Class indices are 0-based throughout the
/// library; file formats use 1-based labels to match their c_1..c_n columns.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;  // unset state (size 0); valid instances have size >= 2

  explicit ProbabilityVector(Vector entries);
  ProbabilityVector(std::initializer_list<double> entries);

  /// Normalizes an arbitrary non-negative vector (any positive sum accepted).
  static ProbabilityVector proportional_to(Vector raw);

  Eigen::Index size() const { return values_.size(); }
  const Vector& values() const { return values_; }
  double operator[](Eigen::Index i) const { return values_(i); }

  bool operator==(const ProbabilityVector& other) const { return values_ == other.values_; }

 private:
  struct unchecked_t {};
  ProbabilityVector(Vector v, unchecked_t) : values_(std::move(v)) {}

  Vector values_;
};

/// normalize(raw): output proportional to input, unit sum.
ProbabilityVector normalize(const Vector& raw);

/// Index of the maximal entry; ties break toward the lowest index.
std::size_t argmax_class(const ProbabilityVector& p);

/// Ordered family of disjoint half-open cells covering [0, 1], keyed on the
/// class-1 score of a binary prediction. Cell i is (c_{i-1}, c_i] with
/// implicit outer sentinels, so a score equal to a cutpoint belongs to the
/// cell whose upper bound it is.
class Partition {
 public:
  explicit Partition(std::vector<double> cutpoints);

  std::size_t cell_count() const { return cutpoints_.size() + 1; }
  const std::vector<double>& cutpoints() const { return cutpoints_; }

  std::size_t cell_of_score(double score) const;

 private:
  std::vector<double> cutpoints_;
};

/// Distribution of predictions over partition cells, conditional on the true
/// class: entry (i, j) is the dev-phase probability that a class-i sample's
/// prediction lands in cell j. Rows are classes, columns are cells.
struct ConfusionMatrix {
  Matrix probs;                            // n_classes x m_cells, rows sum to 1
  std::vector<std::int64_t> class_counts;  // dev samples per class behind the estimate

  Eigen::Index n_classes() const { return probs.rows(); }
  Eigen::Index m_cells() const { return probs.cols(); }

  void validate() const;
};

/// Integer counts of field predictions per partition cell.
struct CellHistogram {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  static CellHistogram from_counts(std::vector<std::int64_t> counts);
  std::size_t cell_count() const { return counts.size(); }
  void validate() const;
};

struct LabeledRow {
  std::string sample_id;
  std::optional<std::string> group_id;
  ProbabilityVector prediction;
  std::size_t label = 0;  // 0-based class index
};

struct UnlabeledRow {
  std::string sample_id;
  std::optional<std::string> group_id;
  ProbabilityVector prediction;
};

struct LabeledPredictionSet {
  std::vector<LabeledRow> rows;

  std::size_t size() const { return rows.size(); }
  Eigen::Index class_count() const { return rows.empty() ? 0 : rows.front().prediction.size(); }
  void validate() const;
};

struct UnlabeledPredictionSet {
  std::vector<UnlabeledRow> rows;

  std::size_t size() const { return rows.size(); }
  Eigen::Index class_count() const { return rows.empty() ? 0 : rows.front().prediction.size(); }
  void validate() const;
};

}  // namespace urc
