#pragma once

#include <vector>

#include "urc/prevalence.hpp"

namespace urc {

/// Intervals over the target's support: interior edges are finite and
/// strictly increasing, the outer bounds are open-ended. Interval i is
/// (e_{i-1}, e_i], matching the right-closed cell convention.
struct IntervalGrid {
  std::vector<double> interior_edges;

  std::size_t interval_count() const { return interior_edges.size() + 1; }
  std::size_t interval_of(double value) const;
  void validate() const;
};

/// Sample-based predictive distribution reduced to interval masses plus the
/// empirical within-interval shapes. Masses are smoothed, so `within[i]` is
/// non-empty exactly when the interval actually received samples.
struct DiscretizedPrediction {
  ProbabilityVector masses;
  std::vector<std::vector<double>> within;
};

/// Interior edges at the empirical i/n-quantiles of the dev point
/// predictions (order-statistic convention, no interpolation).
IntervalGrid build_quantile_grid(const std::vector<double>& dev_point_predictions, std::size_t n);

DiscretizedPrediction discretize(const std::vector<double>& prediction_samples,
                                 const IntervalGrid& grid, double smoothing = 0.5);

/// Prior-ratio mass reweighting; within-interval shapes are left untouched
/// (the consistency assumption applied interval-wise).
DiscretizedPrediction recalibrate_distribution(const DiscretizedPrediction& d,
                                               const ProbabilityVector& dev_prior,
                                               const ProbabilityVector& app_prior);

struct RegressionDev {
  std::vector<double> point_predictions;
  std::vector<double> targets;
};

struct RegressionUrcResult {
  PrevalenceEstimate interval_estimate;            // over target intervals
  std::vector<DiscretizedPrediction> recalibrated; // one per field sample, input order
  IntervalGrid grid;
  ProbabilityVector dev_interval_prior;
  Vector representatives;  // per-interval mean dev point prediction
  ConfusionMatrix m_a;     // rows = target intervals, columns = predicted-value cells
};

/// Interval-classifier view of a sample-based regression model: grid and
/// summaries from dev, field samples reduced to interval masses, cells keyed
/// on the mass-weighted predicted value, MAP estimation with both the
/// divergence and the continuity regularizer, and every field distribution
/// reweighted by the estimated interval prior.
RegressionUrcResult regression_urc(const RegressionDev& dev,
                                   const std::vector<std::vector<double>>& field_samples,
                                   std::size_t n_intervals, const MapConfig& config,
                                   double smoothing = 0.5);

}  // namespace urc
