#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "urc/recalibrate.hpp"
#include "urc/regression.hpp"
#include "urc/simplex.hpp"

using namespace urc;

namespace {

MapConfig regression_config() {
  MapConfig cfg;
  cfg.loss.kl_weight = 1.0;
  cfg.loss.continuity_weight = 0.1;
  cfg.loss.prior = ProbabilityVector{0.5, 0.5};  // overwritten inside the pipeline
  return cfg;
}

/// Synthetic regression problem: targets are noisy versions of the point
/// predictions, field predictive distributions are samples around a noisy
/// center (optionally shifted).
struct RegressionCase {
  RegressionDev dev;
  std::vector<std::vector<double>> field;
};

RegressionCase make_case(RngStream& rng, std::size_t n_dev, std::size_t n_field,
                         double target_shift) {
  RegressionCase out;
  for (std::size_t i = 0; i < n_dev; ++i) {
    const double center = 4.0 * rng.next_normal();
    out.dev.point_predictions.push_back(center);
    out.dev.targets.push_back(center + rng.next_normal());
  }
  // Predictive distributions stay sharp relative to the interval widths, so
  // the interval view of the field matches the dev prediction process.
  for (std::size_t i = 0; i < n_field; ++i) {
    const double center = 4.0 * rng.next_normal() + target_shift;
    std::vector<double> samples;
    const std::size_t count = 60 + rng.next_index(40);
    for (std::size_t s = 0; s < count; ++s) samples.push_back(center + 0.5 * rng.next_normal());
    out.field.push_back(std::move(samples));
  }
  return out;
}

}  // namespace

TEST_CASE("quantile grid: order statistics") {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(static_cast<double>(i));
  const auto grid = build_quantile_grid(values, 4);
  CHECK(grid.interior_edges == std::vector<double>{25.0, 50.0, 75.0});

  const auto halves = build_quantile_grid({3.0, 1.0, 2.0, 4.0}, 2);
  CHECK(halves.interior_edges == std::vector<double>{2.0});

  CHECK_THROWS_WITH_AS(build_quantile_grid({1.0, 1.0, 1.0}, 2), doctest::Contains("DegenerateGrid"),
                       Error);
}

TEST_CASE("interval grid: right-closed lookup over the whole line") {
  const IntervalGrid grid{{-1.0, 2.0}};
  CHECK(grid.interval_of(-5.0) == 0);
  CHECK(grid.interval_of(-1.0) == 0);
  CHECK(grid.interval_of(0.0) == 1);
  CHECK(grid.interval_of(2.0) == 1);
  CHECK(grid.interval_of(2.5) == 2);
}

TEST_CASE("discretize: counting with and without smoothing") {
  const IntervalGrid grid{{0.0, 10.0}};
  const auto concentrated = discretize({-3.0, -1.0, -2.5}, grid, 0.0);
  CHECK(concentrated.masses[0] == 1.0);
  CHECK(concentrated.masses[1] == 0.0);
  CHECK(concentrated.within[0].size() == 3);
  CHECK(concentrated.within[1].empty());

  const IntervalGrid pair{{0.0}};
  std::vector<double> samples;
  for (int i = 0; i < 7; ++i) samples.push_back(-1.0 - i);
  for (int i = 0; i < 3; ++i) samples.push_back(1.0 + i);
  const auto split = discretize(samples, pair, 0.0);
  CHECK(split.masses[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(split.masses[1] == doctest::Approx(0.3).epsilon(1e-15));

  const auto smoothed = discretize({-1.0}, pair, 0.5);
  CHECK(smoothed.masses[0] == doctest::Approx(1.5 / 2.0).epsilon(1e-15));
  CHECK(smoothed.masses[1] > 0.0);

  // self-consistency: samples spread over a grid built from them
  RngStream rng(91, 0);
  std::vector<double> uniform;
  for (int i = 0; i < 4000; ++i) uniform.push_back(rng.next_double() * 10.0);
  const auto self_grid = build_quantile_grid(uniform, 4);
  const auto masses = discretize(uniform, self_grid, 0.0).masses;
  for (Eigen::Index k = 0; k < 4; ++k) {
    CHECK(masses[k] == doctest::Approx(0.25).epsilon(0.01));
  }
}

TEST_CASE("recalibrate_distribution: mass reweighting, shapes preserved") {
  DiscretizedPrediction d;
  d.masses = ProbabilityVector{0.5, 0.5};
  d.within = {{-1.0, -2.0}, {3.0}};

  const auto same = recalibrate_distribution(d, ProbabilityVector{0.5, 0.5},
                                             ProbabilityVector{0.5, 0.5});
  CHECK((same.masses.values() - d.masses.values()).cwiseAbs().maxCoeff() <= 1e-15);

  const auto shifted = recalibrate_distribution(d, ProbabilityVector{0.5, 0.5},
                                                ProbabilityVector{0.8, 0.2});
  CHECK(shifted.masses[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(shifted.within == d.within);  // bitwise identical conditional shapes

  DiscretizedPrediction certain;
  certain.masses = ProbabilityVector{1.0, 0.0};
  certain.within = {{0.5}, {}};
  const auto still = recalibrate_distribution(certain, ProbabilityVector{0.6, 0.4},
                                              ProbabilityVector{0.2, 0.8});
  CHECK(still.masses[0] == 1.0);
}

TEST_CASE("recalibrate_distribution: mass conservation") {
  RngStream rng(92, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(5));
    DiscretizedPrediction d;
    d.masses = testutil::random_interior_point(rng, n);
    d.within.resize(static_cast<std::size_t>(n));
    const auto out = recalibrate_distribution(d, testutil::random_interior_point(rng, n, 0.05),
                                              testutil::random_interior_point(rng, n, 0.05));
    CHECK(std::abs(simplex::seq_sum(out.masses.values()) - 1.0) <= 1e-12);
  }
}

TEST_CASE("regression_urc: no shift stays near the dev interval frequencies") {
  RngStream rng(93, 0);
  const auto instance = make_case(rng, 2000, 3000, 0.0);
  const auto result = regression_urc(instance.dev, instance.field, 4, regression_config());
  for (Eigen::Index k = 0; k < 4; ++k) {
    CHECK(std::abs(result.interval_estimate.p[k] - result.dev_interval_prior[k]) <= 0.05);
  }
  CHECK(result.recalibrated.size() == instance.field.size());
}

TEST_CASE("regression_urc: an upward target shift dominates the dev distribution") {
  RngStream rng(94, 0);
  const auto instance = make_case(rng, 2000, 3000, 2.5);
  const auto result = regression_urc(instance.dev, instance.field, 4, regression_config());

  // first-order stochastic dominance: the estimated CDF sits below the dev CDF
  double cdf_est = 0.0, cdf_dev = 0.0;
  for (Eigen::Index k = 0; k + 1 < 4; ++k) {
    cdf_est += result.interval_estimate.p[k];
    cdf_dev += result.dev_interval_prior[k];
    CHECK(cdf_est <= cdf_dev);
  }
}

TEST_CASE("regression_urc: two intervals reduce to the binary pipeline") {
  RngStream rng(95, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto instance = make_case(rng, 400 + rng.next_index(400), 300 + rng.next_index(300),
                                    rng.next_double() * 2.0 - 1.0);
    MapConfig cfg = regression_config();
    const double smoothing = 0.5;
    const auto reg = regression_urc(instance.dev, instance.field, 2, cfg, smoothing);

    // The binary comparator presents "target above the dev median" as class 1.
    // Cells stay aligned because the mass-weighted predicted value is monotone
    // in the above-median mass; rows and the prior swap with the classes.
    const double edge = reg.grid.interior_edges[0];
    const double r1 = reg.representatives(0);
    const double r2 = reg.representatives(1);
    const double threshold = (edge - r1) / (r2 - r1);

    DevSummary summary{Partition({threshold}),
                       ConfusionMatrix{},
                       ProbabilityVector{reg.dev_interval_prior[1], reg.dev_interval_prior[0]},
                       smoothing};
    summary.m_a.probs = Matrix(2, 2);
    summary.m_a.probs.row(0) = reg.m_a.probs.row(1);
    summary.m_a.probs.row(1) = reg.m_a.probs.row(0);
    summary.m_a.class_counts = {reg.m_a.class_counts[1], reg.m_a.class_counts[0]};

    UnlabeledPredictionSet field;
    std::vector<DiscretizedPrediction> discretized;
    for (std::size_t i = 0; i < instance.field.size(); ++i) {
      auto d = discretize(instance.field[i], reg.grid, smoothing);
      field.rows.push_back({"s" + std::to_string(i), std::nullopt,
                            ProbabilityVector{d.masses[1], d.masses[0]}});
      discretized.push_back(std::move(d));
    }

    const auto binary = global_urc(summary, field, cfg);
    CHECK(std::abs(binary.estimate.p[0] - reg.interval_estimate.p[1]) <= 1e-9);
    CHECK(std::abs(binary.estimate.p[1] - reg.interval_estimate.p[0]) <= 1e-9);
    for (std::size_t i = 0; i < field.rows.size(); ++i) {
      CHECK(std::abs(binary.recalibrated.rows[i].prediction[0] -
                     reg.recalibrated[i].masses[1]) <= 1e-9);
    }
  }
}
