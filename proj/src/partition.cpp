#include "urc/partition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "urc/simplex.hpp"

namespace urc {

void CellFrequencies::validate() const {
  require(simplex::is_distribution(freqs, 1e-9), ErrorCode::NotNormalized,
          "cell frequencies must sum to 1");
}

Partition build_equal_mass_partition(const std::vector<double>& dev_scores, std::size_t m) {
  require(!dev_scores.empty(), ErrorCode::EmptySample, "no dev scores");
  require(m >= 1, ErrorCode::InvalidConfig, "cell count must be positive");
  for (const double s : dev_scores) {
    require(s >= 0.0 && s <= 1.0, ErrorCode::InvalidConfig, "score outside [0, 1]");
  }
  const std::size_t distinct = std::set<double>(dev_scores.begin(), dev_scores.end()).size();
  require(m <= distinct, ErrorCode::DegeneratePartition,
          "more cells than distinct score values");

  std::vector<double> sorted = dev_scores;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  std::vector<double> cuts;
  cuts.reserve(m - 1);
  for (std::size_t i = 1; i < m; ++i) {
    // ceil(i*N/m)-th order statistic, 1-based
    const std::size_t k = (i * n + m - 1) / m;
    cuts.push_back(sorted[k - 1]);
  }
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    require(cuts[i] > cuts[i - 1], ErrorCode::DegeneratePartition, "coinciding cutpoints");
  }
  for (const double c : cuts) {
    require(c > 0.0 && c < 1.0, ErrorCode::DegeneratePartition,
            "quantile cutpoint on the score boundary");
  }
  return Partition(std::move(cuts));
}

std::size_t assign_cell(const Partition& partition, const ProbabilityVector& prediction) {
  require(prediction.size() == 2, ErrorCode::ShapeMismatch,
          "cell assignment expects binary predictions");
  return partition.cell_of_score(prediction[0]);
}

CellHistogram histogram(const Partition& partition, const UnlabeledPredictionSet& field) {
  std::vector<std::int64_t> counts(partition.cell_count(), 0);
  for (const auto& row : field.rows) {
    ++counts[assign_cell(partition, row.prediction)];
  }
  return CellHistogram::from_counts(std::move(counts));
}

ConfusionMatrix estimate_confusion_matrix(const Partition& partition,
                                          const LabeledPredictionSet& dev, double smoothing) {
  require(smoothing >= 0.0, ErrorCode::InvalidConfig, "smoothing must be non-negative");
  require(!dev.rows.empty(), ErrorCode::EmptySample, "empty dev set");
  dev.validate();
  const auto n = static_cast<std::size_t>(dev.class_count());
  const std::size_t m = partition.cell_count();

  Matrix counts = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::vector<std::int64_t> class_counts(n, 0);
  for (const auto& row : dev.rows) {
    const std::size_t j = assign_cell(partition, row.prediction);
    counts(static_cast<Eigen::Index>(row.label), static_cast<Eigen::Index>(j)) += 1.0;
    ++class_counts[row.label];
  }
  for (std::size_t i = 0; i < n; ++i) {
    require(class_counts[i] > 0, ErrorCode::MissingClass,
            "class " + std::to_string(i + 1) + " absent from dev data");
  }

  ConfusionMatrix out;
  out.probs = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = static_cast<double>(class_counts[i]) + static_cast<double>(m) * smoothing;
    for (std::size_t j = 0; j < m; ++j) {
      out.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + smoothing) / denom;
    }
  }
  out.class_counts = std::move(class_counts);
  out.validate();
  return out;
}

CellFrequencies observed_cell_frequencies(const CellHistogram& hist) {
  hist.validate();
  require(hist.total > 0, ErrorCode::EmptySample, "empty histogram");
  CellFrequencies out;
  out.freqs = Vector(static_cast<Eigen::Index>(hist.counts.size()));
  for (std::size_t j = 0; j < hist.counts.size(); ++j) {
    out.freqs(static_cast<Eigen::Index>(j)) =
        static_cast<double>(hist.counts[j]) / static_cast<double>(hist.total);
  }
  // The quotients can round to a sum one ulp off unit. Rewriting the last
  // nonzero coordinate as 1 minus the sequential prefix makes the sequential
  // sum exactly one (the trailing zero additions are exact), at a deviation
  // of at most a few ulps from its quotient.
  Eigen::Index last_nonzero = 0;
  for (Eigen::Index j = 0; j < out.freqs.size(); ++j) {
    if (hist.counts[static_cast<std::size_t>(j)] > 0) last_nonzero = j;
  }
  double prefix = 0.0;
  for (Eigen::Index j = 0; j < last_nonzero; ++j) prefix += out.freqs(j);
  out.freqs(last_nonzero) = 1.0 - prefix;
  return out;
}

}  // namespace urc
