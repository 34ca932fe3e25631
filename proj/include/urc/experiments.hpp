#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urc/baselines.hpp"
#include "urc/metrics.hpp"
#include "urc/recalibrate.hpp"
#include "urc/synthdata.hpp"

namespace urc {

enum class ExperimentKind { balanced_training, balanced_test };

/// Quantifier comparison sweep: per replica, generate train/validation/test
/// splits, train a logistic model, estimate the hard confusion and the
/// partition summaries on validation, and run CC, ACC, EM and the
/// recalibration estimator on the test predictions.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::balanced_training;
  std::vector<std::int64_t> test_sizes = {50, 100, 500, 1000, 3000};
  int replicas = 30;
  std::int64_t train_size = 2000;
  double train_prevalence = 0.5;
  double test_prevalence = 0.05;
  std::uint64_t seed = 0;

  static ExperimentConfig preset(ExperimentKind kind, std::uint64_t seed);
  void validate() const;
};

struct ResultRow {
  std::string method;  // cc | acc | em | urc
  std::int64_t test_size = 0;
  int replica = 0;  // 1-based
  double estimated_prevalence_p1 = 0.0;
  double true_prevalence = 0.0;
  double abs_error = 0.0;
  bool converged = false;
};

/// Deterministic given the seed; `threads` only changes wall time, never the
/// rows. A failed quantifier yields a row with converged=false and NaN
/// estimate instead of aborting the sweep.
std::vector<ResultRow> run_quantification_experiment(const ExperimentConfig& config,
                                                     int threads = 1);

std::string result_rows_to_csv(const std::vector<ResultRow>& rows);

struct AggregateRow {
  std::string method;
  std::int64_t test_size = 0;
  double median_estimate = 0.0;
  double median_abs_error = 0.0;
  double error_lo95 = 0.0;  // central 95% range over replicas
  double error_hi95 = 0.0;
};

std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows);
std::string aggregate_rows_to_csv(const std::vector<AggregateRow>& rows);

/// Two complementary-rate groups scored before and after per-group
/// recalibration against one balanced, Platt-calibrated synthetic
/// classifier.
struct LocalSweepRow {
  double pair_rate = 0.5;  // group A gets this base rate, group B its complement
  std::string group_id;
  double group_base_rate = 0.5;
  std::int64_t group_size = 0;
  double estimated_p1 = 0.0;
  bool converged = false;
  double brier_before = 0.0, brier_after = 0.0;
  double calibration_before = 0.0, calibration_after = 0.0;
  double refinement_before = 0.0, refinement_after = 0.0;
  double accuracy_before = 0.0, accuracy_after = 0.0;
};

std::vector<LocalSweepRow> run_local_experiment(const std::vector<double>& base_rates,
                                                std::int64_t n_per_group, std::uint64_t seed,
                                                std::size_t cells = 4);

std::string local_rows_to_csv(const std::vector<LocalSweepRow>& rows);

/// Median that ignores NaN entries; NaN when nothing remains.
double median_ignoring_nan(std::vector<double> values);

}  // namespace urc
