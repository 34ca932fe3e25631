#include "urc/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "urc/recalibrate.hpp"

namespace urc {

void IntervalGrid::validate() const {
  require(interval_count() >= 2, ErrorCode::DegenerateGrid, "need at least two intervals");
  for (std::size_t i = 0; i < interior_edges.size(); ++i) {
    require(std::isfinite(interior_edges[i]), ErrorCode::DegenerateGrid, "non-finite edge");
    if (i > 0) {
      require(interior_edges[i] > interior_edges[i - 1], ErrorCode::DegenerateGrid,
              "edges not strictly increasing");
    }
  }
}

std::size_t IntervalGrid::interval_of(double value) const {
  const auto it = std::lower_bound(interior_edges.begin(), interior_edges.end(), value);
  return static_cast<std::size_t>(it - interior_edges.begin());
}

IntervalGrid build_quantile_grid(const std::vector<double>& dev_point_predictions,
                                 std::size_t n) {
  require(!dev_point_predictions.empty(), ErrorCode::EmptySample, "no dev point predictions");
  require(n >= 2, ErrorCode::InvalidConfig, "need at least two intervals");
  const std::size_t distinct =
      std::set<double>(dev_point_predictions.begin(), dev_point_predictions.end()).size();
  require(n <= distinct, ErrorCode::DegenerateGrid, "more intervals than distinct values");

  std::vector<double> sorted = dev_point_predictions;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t count = sorted.size();

  IntervalGrid grid;
  grid.interior_edges.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t k = (i * count + n - 1) / n;  // ceil(i*N/n)-th order statistic
    grid.interior_edges.push_back(sorted[k - 1]);
  }
  for (std::size_t i = 1; i < grid.interior_edges.size(); ++i) {
    require(grid.interior_edges[i] > grid.interior_edges[i - 1], ErrorCode::DegenerateGrid,
            "coinciding quantile edges");
  }
  grid.validate();
  return grid;
}

DiscretizedPrediction discretize(const std::vector<double>& prediction_samples,
                                 const IntervalGrid& grid, double smoothing) {
  require(!prediction_samples.empty(), ErrorCode::EmptySample, "no prediction samples");
  require(smoothing >= 0.0, ErrorCode::InvalidConfig, "smoothing must be non-negative");
  grid.validate();
  const std::size_t n = grid.interval_count();

  DiscretizedPrediction out;
  out.within.resize(n);
  std::vector<double> counts(n, 0.0);
  for (const double v : prediction_samples) {
    const std::size_t k = grid.interval_of(v);
    counts[k] += 1.0;
    out.within[k].push_back(v);
  }
  Vector masses(static_cast<Eigen::Index>(n));
  const double denom =
      static_cast<double>(prediction_samples.size()) + static_cast<double>(n) * smoothing;
  for (std::size_t k = 0; k < n; ++k) {
    masses(static_cast<Eigen::Index>(k)) = (counts[k] + smoothing) / denom;
  }
  out.masses = normalize(masses);
  return out;
}

DiscretizedPrediction recalibrate_distribution(const DiscretizedPrediction& d,
                                               const ProbabilityVector& dev_prior,
                                               const ProbabilityVector& app_prior) {
  DiscretizedPrediction out;
  out.masses = recalibrate_prediction(d.masses, dev_prior, app_prior);
  out.within = d.within;
  return out;
}

RegressionUrcResult regression_urc(const RegressionDev& dev,
                                   const std::vector<std::vector<double>>& field_samples,
                                   std::size_t n_intervals, const MapConfig& config,
                                   double smoothing) {
  require(dev.point_predictions.size() == dev.targets.size(), ErrorCode::LengthMismatch,
          "dev predictions and targets differ in length");
  require(!field_samples.empty(), ErrorCode::EmptySample, "no field samples");

  RegressionUrcResult out;
  out.grid = build_quantile_grid(dev.point_predictions, n_intervals);
  const auto n = static_cast<Eigen::Index>(n_intervals);

  // Per-interval representative: mean dev point prediction. The quantile
  // construction guarantees every interval holds dev points.
  out.representatives = Vector::Zero(n);
  Vector rep_counts = Vector::Zero(n);
  for (const double v : dev.point_predictions) {
    const auto k = static_cast<Eigen::Index>(out.grid.interval_of(v));
    out.representatives(k) += v;
    rep_counts(k) += 1.0;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    require(rep_counts(k) > 0.0, ErrorCode::DegenerateGrid, "interval without dev points");
    out.representatives(k) /= rep_counts(k);
  }

  // Confusion estimate: rows are target intervals, columns are cells of the
  // predicted value (a dev sample's predicted value is its point prediction).
  Matrix counts = Matrix::Zero(n, n);
  std::vector<std::int64_t> class_counts(n_intervals, 0);
  for (std::size_t s = 0; s < dev.targets.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(out.grid.interval_of(dev.targets[s]));
    const auto j = static_cast<Eigen::Index>(out.grid.interval_of(dev.point_predictions[s]));
    counts(i, j) += 1.0;
    ++class_counts[static_cast<std::size_t>(i)];
  }
  for (std::size_t i = 0; i < n_intervals; ++i) {
    require(class_counts[i] > 0, ErrorCode::MissingClass,
            "no dev targets in interval " + std::to_string(i + 1));
  }
  out.m_a.probs = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = static_cast<double>(class_counts[static_cast<std::size_t>(i)]) +
                         static_cast<double>(n_intervals) * smoothing;
    for (Eigen::Index j = 0; j < n; ++j) {
      out.m_a.probs(i, j) = (counts(i, j) + smoothing) / denom;
    }
  }
  out.m_a.class_counts = class_counts;
  out.m_a.validate();

  Vector prior(n);
  const double prior_denom = static_cast<double>(dev.targets.size()) +
                             static_cast<double>(n_intervals) * smoothing;
  for (Eigen::Index i = 0; i < n; ++i) {
    prior(i) = (static_cast<double>(class_counts[static_cast<std::size_t>(i)]) + smoothing) /
               prior_denom;
  }
  out.dev_interval_prior = normalize(prior);

  // Field histogram over predicted-value cells; the predicted value of a
  // discretized prediction is its mass-weighted representative.
  std::vector<DiscretizedPrediction> discretized;
  discretized.reserve(field_samples.size());
  std::vector<std::int64_t> hist_counts(n_intervals, 0);
  for (const auto& samples : field_samples) {
    DiscretizedPrediction d = discretize(samples, out.grid, smoothing);
    const double value = d.masses.values().dot(out.representatives);
    ++hist_counts[out.grid.interval_of(value)];
    discretized.push_back(std::move(d));
  }

  MapConfig cfg = config;
  cfg.loss.prior = out.dev_interval_prior;
  out.interval_estimate =
      map_estimate(CellHistogram::from_counts(std::move(hist_counts)), out.m_a, cfg);

  out.recalibrated.reserve(discretized.size());
  for (const auto& d : discretized) {
    out.recalibrated.push_back(
        recalibrate_distribution(d, out.dev_interval_prior, out.interval_estimate.p));
  }
  return out;
}

}  // namespace urc
