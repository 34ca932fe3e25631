#include "urc/recalibrate.hpp"

#include <algorithm>
#include <map>

namespace urc {

void DevSummary::validate() const {
  m_a.validate();
  require(static_cast<std::size_t>(m_a.m_cells()) == partition.cell_count(),
          ErrorCode::ShapeMismatch, "confusion columns differ from partition cells");
  require(dev_prior.size() == m_a.n_classes(), ErrorCode::ShapeMismatch,
          "dev prior length differs from classes");
}

ProbabilityVector recalibrate_prediction(const ProbabilityVector& c,
                                         const ProbabilityVector& dev_prior,
                                         const ProbabilityVector& app_prior) {
  require(c.size() == dev_prior.size() && c.size() == app_prior.size(), ErrorCode::ShapeMismatch,
          "length mismatch");
  for (Eigen::Index i = 0; i < dev_prior.size(); ++i) {
    require(dev_prior[i] > 0.0, ErrorCode::ZeroPriorCoordinate,
            "dev prior has a zero coordinate");
  }
  Vector raw(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    raw(i) = c[i] * (app_prior[i] / dev_prior[i]);
  }
  return normalize(raw);
}

DevSummary build_dev_summary(const LabeledPredictionSet& dev, std::size_t m, double smoothing) {
  require(!dev.rows.empty(), ErrorCode::EmptySample, "empty dev set");
  dev.validate();
  require(dev.class_count() == 2, ErrorCode::ShapeMismatch,
          "the partition builder handles binary predictions");

  std::vector<double> scores;
  scores.reserve(dev.rows.size());
  for (const auto& row : dev.rows) scores.push_back(row.prediction[0]);

  Partition partition = build_equal_mass_partition(scores, m);
  ConfusionMatrix m_a = estimate_confusion_matrix(partition, dev, smoothing);

  // Class prior with the same additive smoothing as the cell estimates, so
  // the regularizer target and the per-sample correction share one estimate.
  const auto n = static_cast<std::size_t>(dev.class_count());
  Vector prior(static_cast<Eigen::Index>(n));
  const double denom =
      static_cast<double>(dev.rows.size()) + static_cast<double>(n) * smoothing;
  for (std::size_t i = 0; i < n; ++i) {
    prior(static_cast<Eigen::Index>(i)) =
        (static_cast<double>(m_a.class_counts[i]) + smoothing) / denom;
  }

  DevSummary out{Partition(partition.cutpoints()), std::move(m_a), normalize(prior), smoothing};
  out.validate();
  return out;
}

RecalibrationResult global_urc(const DevSummary& summary, const UnlabeledPredictionSet& field,
                               const MapConfig& config) {
  summary.validate();
  require(!field.rows.empty(), ErrorCode::EmptySample, "empty field set");
  field.validate();
  require(field.class_count() == summary.m_a.n_classes(), ErrorCode::ShapeMismatch,
          "field class count differs from dev summary");

  MapConfig cfg = config;
  cfg.loss.prior = summary.dev_prior;

  RecalibrationResult out;
  out.estimate = map_estimate(histogram(summary.partition, field), summary.m_a, cfg);
  out.recalibrated.rows.reserve(field.rows.size());
  for (const auto& row : field.rows) {
    out.recalibrated.rows.push_back(
        {row.sample_id, row.group_id,
         recalibrate_prediction(row.prediction, summary.dev_prior, out.estimate.p)});
  }
  return out;
}

std::vector<GroupOutcome> local_urc(const DevSummary& summary, const UnlabeledPredictionSet& field,
                                    const MapConfig& config, std::size_t min_group_size,
                                    const std::vector<std::string>& groups) {
  summary.validate();
  std::map<std::string, UnlabeledPredictionSet> by_group;  // ordered -> deterministic output
  for (const auto& g : groups) by_group[g];
  for (const auto& row : field.rows) {
    require(row.group_id.has_value() && !row.group_id->empty(), ErrorCode::MissingGroup,
            "sample " + row.sample_id + " has no group id");
    by_group[*row.group_id].rows.push_back(row);
  }

  std::vector<GroupOutcome> out;
  out.reserve(by_group.size());
  for (auto& [group, subset] : by_group) {
    GroupOutcome outcome;
    outcome.group_id = group;
    try {
      require(!subset.rows.empty(), ErrorCode::EmptySample, "group " + group + " is empty");
      if (subset.rows.size() < min_group_size) {
        // Too little evidence to move off the prior; pass predictions through.
        RecalibrationResult r;
        r.estimate.p = summary.dev_prior;
        r.estimate.method = EstimateMethod::map;
        r.estimate.converged = true;
        r.recalibrated = subset;
        r.group_id = group;
        outcome.result = std::move(r);
      } else {
        RecalibrationResult r = global_urc(summary, subset, config);
        r.group_id = group;
        outcome.result = std::move(r);
      }
      outcome.ok = true;
    } catch (const Error& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    out.push_back(std::move(outcome));
  }
  return out;
}

}  // namespace urc
