#pragma once

#include <vector>

#include "urc/types.hpp"

namespace urc {

struct BrierDecomposition {
  double brier = 0.0;        // raw score, mean (c_1 - 1{y=1})^2
  double calibration = 0.0;  // sum_k (n_k/N) (mean_pred_k - event_rate_k)^2
  double refinement = 0.0;   // sum_k (n_k/N) event_rate_k (1 - event_rate_k)
  int bins = 10;
};

struct ReliabilityBin {
  std::int64_t count = 0;
  double mean_prediction = 0.0;
  double event_rate = 0.0;
};

struct PerSampleNll {
  double value = 0.0;
  bool hit_zero = false;  // some sample assigned zero mass to its true class
};

struct HardMetrics {
  double accuracy = 0.0;
  std::vector<double> precision;      // zero when the class was never predicted
  std::vector<bool> precision_defined;
};

struct PlattParams {
  double slope = 1.0;
  double intercept = 0.0;
};

/// Mean squared error of the class-1 probability against the class-1
/// indicator (binary convention).
double brier_score(const std::vector<ProbabilityVector>& predictions,
                   const std::vector<std::size_t>& labels);

/// Multiclass sum-of-squares variant; not used by the binary reports.
double multiclass_brier_score(const std::vector<ProbabilityVector>& predictions,
                              const std::vector<std::size_t>& labels);

/// Calibration/refinement split over equal-width bins of the class-1 score
/// (deciles by default). The two components sum to the Brier score of the
/// bin-mean predictor.
BrierDecomposition brier_decomposition(const std::vector<ProbabilityVector>& predictions,
                                       const std::vector<std::size_t>& labels, int n_bins = 10);

std::vector<ReliabilityBin> reliability_table(const std::vector<ProbabilityVector>& predictions,
                                              const std::vector<std::size_t>& labels,
                                              int n_bins = 10);

/// Mean negative log of the probability assigned to the true class.
PerSampleNll nll_per_sample(const std::vector<ProbabilityVector>& predictions,
                            const std::vector<std::size_t>& labels);

HardMetrics accuracy_and_precision(const std::vector<ProbabilityVector>& predictions,
                                   const std::vector<std::size_t>& labels);

/// Maximum-likelihood sigmoid fit on the logit of the score by damped Newton
/// iterations. Labels are class-1 indicators of the score being calibrated.
PlattParams platt_fit(const std::vector<double>& scores, const std::vector<std::size_t>& labels);

/// Calibrated probability; the input is clamped to [1e-9, 1-1e-9] before the
/// logit.
double platt_apply(const PlattParams& params, double score);

}  // namespace urc
