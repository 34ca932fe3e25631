#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urc/prevalence.hpp"

namespace urc {

/// Everything the dev phase has to hand over for field-side recalibration:
/// the partition, the cell distribution per class, and the dev class prior.
struct DevSummary {
  Partition partition;
  ConfusionMatrix m_a;
  ProbabilityVector dev_prior;
  double smoothing = 0.0;

  void validate() const;
};

struct RecalibrationResult {
  PrevalenceEstimate estimate;
  UnlabeledPredictionSet recalibrated;  // same ids, same order, new prediction vectors
  std::optional<std::string> group_id;
};

/// Per-group outcome of local recalibration; one group failing does not
/// abort the others.
struct GroupOutcome {
  std::string group_id;
  bool ok = false;
  std::optional<RecalibrationResult> result;
  std::string error;  // code + message when !ok
};

/// Known-bias correction: scale each coordinate by the prior ratio and
/// renormalize.
ProbabilityVector recalibrate_prediction(const ProbabilityVector& c,
                                         const ProbabilityVector& dev_prior,
                                         const ProbabilityVector& app_prior);

/// Equal-mass partition over the dev class-1 scores plus the smoothed cell
/// and class summaries estimated from the same data.
DevSummary build_dev_summary(const LabeledPredictionSet& dev, std::size_t m = 4,
                             double smoothing = 0.5);

/// Estimate the field class distribution from the cell histogram, then apply
/// the known-bias correction to every prediction.
RecalibrationResult global_urc(const DevSummary& summary, const UnlabeledPredictionSet& field,
                               const MapConfig& config);

/// Global recalibration applied independently per group id, groups ordered
/// lexicographically. Groups smaller than `min_group_size` short-circuit to
/// the dev prior. An explicit `groups` list may name groups to process
/// (missing ones are reported as empty-sample failures); by default groups
/// are discovered from the data.
std::vector<GroupOutcome> local_urc(const DevSummary& summary, const UnlabeledPredictionSet& field,
                                    const MapConfig& config, std::size_t min_group_size = 1,
                                    const std::vector<std::string>& groups = {});

}  // namespace urc
