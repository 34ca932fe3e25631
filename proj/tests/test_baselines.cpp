#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "urc/baselines.hpp"
#include "urc/partition.hpp"
#include "urc/prevalence.hpp"

using namespace urc;

namespace {

UnlabeledPredictionSet field_of(std::initializer_list<ProbabilityVector> preds) {
  UnlabeledPredictionSet out;
  int i = 0;
  for (const auto& p : preds) out.rows.push_back({"s" + std::to_string(++i), std::nullopt, p});
  return out;
}

HardConfusion hard2x2(double tpr, double fpr) {
  HardConfusion h;
  h.probs = Matrix(2, 2);
  h.probs << tpr, 1.0 - tpr, fpr, 1.0 - fpr;
  return h;
}

/// Field with the requested fraction of samples hard-classified as class 1.
UnlabeledPredictionSet field_with_cc(double cc, std::size_t n) {
  UnlabeledPredictionSet out;
  const auto ones = static_cast<std::size_t>(std::llround(cc * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const double c1 = i < ones ? 0.9 : 0.1;
    out.rows.push_back({"s" + std::to_string(i), std::nullopt, ProbabilityVector{c1, 1.0 - c1}});
  }
  return out;
}

/// Best marginal log-likelihood over the 1001-point binary grid.
double grid_best_marginal_ll(const UnlabeledPredictionSet& field,
                             const ProbabilityVector& dev_prior) {
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t <= 1000; ++t) {
    const double p1 = static_cast<double>(t) / 1000.0;
    double ll = 0.0;
    for (const auto& row : field.rows) {
      const double s = row.prediction[0] * p1 / dev_prior[0] +
                       row.prediction[1] * (1.0 - p1) / dev_prior[1];
      ll += s > 0.0 ? std::log(s) : -1e18;
    }
    best = std::max(best, ll);
  }
  return best;
}

}  // namespace

TEST_CASE("classify and count: worked examples") {
  const auto half =
      classify_and_count(field_of({ProbabilityVector{0.9, 0.1}, ProbabilityVector{0.4, 0.6}}));
  CHECK(half.p[0] == doctest::Approx(0.5).epsilon(1e-12));

  const auto all =
      classify_and_count(field_of({ProbabilityVector{0.9, 0.1}, ProbabilityVector{0.6, 0.4}}));
  CHECK(all.p[0] == 1.0);

  const auto tie = classify_and_count(field_of({ProbabilityVector{0.5, 0.5}}));
  CHECK(tie.p[0] == 1.0);  // ties break toward the lowest class index

  CHECK_THROWS_WITH_AS(classify_and_count(UnlabeledPredictionSet{}),
                       doctest::Contains("EmptySample"), Error);
}

TEST_CASE("adjusted classify and count: binary correction formula") {
  const auto mid = adjusted_classify_and_count(field_with_cc(0.5, 1000), hard2x2(0.8, 0.2));
  CHECK(mid.p[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(mid.converged);
  CHECK(mid.condition_number.has_value());

  const auto boundary = adjusted_classify_and_count(field_with_cc(0.2, 1000), hard2x2(0.8, 0.2));
  CHECK(boundary.p[0] == doctest::Approx(0.0).epsilon(1e-9));

  // raw (0.1 - 0.2) / 0.6 = -1/6 clips to the boundary
  const auto clipped = adjusted_classify_and_count(field_with_cc(0.1, 1000), hard2x2(0.8, 0.2));
  CHECK(clipped.p[0] == 0.0);
  CHECK_FALSE(clipped.converged);

  CHECK_THROWS_WITH_AS(adjusted_classify_and_count(field_with_cc(0.5, 100), hard2x2(0.5, 0.5)),
                       doctest::Contains("RankDeficient"), Error);
}

TEST_CASE("expectation maximization: fixed points") {
  const ProbabilityVector prior{0.5, 0.5};

  auto constant = field_of({ProbabilityVector{0.5, 0.5}, ProbabilityVector{0.5, 0.5}});
  const auto fixed = expectation_maximization(constant, prior, prior, EmConfig{});
  CHECK(fixed.p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fixed.converged);
  CHECK(*fixed.iterations_used <= 2);

  auto symmetric = field_of({ProbabilityVector{0.8, 0.2}, ProbabilityVector{0.2, 0.8}});
  const auto sym = expectation_maximization(symmetric, prior, prior, EmConfig{});
  CHECK(sym.p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sym.converged);
}

TEST_CASE("expectation maximization: recovers a strong shift and matches the grid") {
  RngStream rng(61, 0);
  PopulationSpec spec;
  spec.counts = {{45, 5}, {30, 20}, {20, 30}, {5, 45}};
  const auto draw =
      make_calibrated_population(spec, ProbabilityVector{0.05, 0.95}, rng, 10, 3000);
  const auto dev_prior = spec.dev_prior();

  const auto est = expectation_maximization(draw.field, dev_prior, dev_prior, EmConfig{});
  CHECK(std::abs(est.p[0] - 0.05) <= 0.03);

  const double em_ll = em_marginal_log_likelihood(draw.field, dev_prior, est.p);
  CHECK(em_ll >= grid_best_marginal_ll(draw.field, dev_prior) - 1e-6);
}

TEST_CASE("property: em ascends its marginal likelihood") {
  RngStream rng(62, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = testutil::random_population(rng, 2 + rng.next_index(6));
    const auto shift = testutil::random_interior_point(rng, 2, 0.05);
    const auto draw = make_calibrated_population(spec, shift, rng, 10,
                                                 50 + rng.next_index(400));
    const auto dev_prior = spec.dev_prior();
    std::vector<double> trace;
    EmConfig config;
    config.max_iterations = 200;
    expectation_maximization(draw.field, dev_prior, dev_prior, config, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] >= trace[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("property: cc keeps a bias floor that em does not") {
  RngStream rng(63, 0);
  PopulationSpec spec;
  spec.counts = {{45, 5}, {30, 20}, {20, 30}, {5, 45}};  // balanced dev
  const auto dev_prior = spec.dev_prior();

  std::vector<double> cc_errors, em_errors;
  for (int replica = 0; replica < 11; ++replica) {
    const auto draw =
        make_calibrated_population(spec, ProbabilityVector{0.05, 0.95}, rng, 10, 3000);
    cc_errors.push_back(std::abs(classify_and_count(draw.field).p[0] - 0.05));
    em_errors.push_back(std::abs(
        expectation_maximization(draw.field, dev_prior, dev_prior, EmConfig{}).p[0] - 0.05));
  }
  std::sort(cc_errors.begin(), cc_errors.end());
  std::sort(em_errors.begin(), em_errors.end());
  CHECK(cc_errors[5] > em_errors[5]);
}

TEST_CASE("property: acc equals the linear solve on the argmax partition") {
  RngStream rng(64, 0);
  for (int trial = 0; trial < 10; ++trial) {
    // labeled validation data with continuous scores (never exactly 0.5)
    LabeledPredictionSet valid;
    for (int i = 0; i < 400; ++i) {
      const std::size_t label = rng.next_index(2);
      double score = label == 0 ? 0.5 + 0.499 * rng.next_double()
                                : 0.001 + 0.499 * rng.next_double();
      if (rng.next_double() < 0.2) score = 1.0 - score;  // noise
      valid.rows.push_back(
          {"v" + std::to_string(i), std::nullopt, ProbabilityVector{score, 1.0 - score}, label});
    }
    UnlabeledPredictionSet field;
    for (int i = 0; i < 600; ++i) {
      const double score = std::min(0.999, std::max(0.001, rng.next_double()));
      field.rows.push_back(
          {"f" + std::to_string(i), std::nullopt, ProbabilityVector{score, 1.0 - score}});
    }

    const double smoothing = 0.5;
    const auto hard = estimate_hard_confusion(valid, smoothing);
    const auto acc = adjusted_classify_and_count(field, hard);

    // cell 1 of the 0.5-cut partition is the argmax-2 region, so the linear
    // route sees the same system with columns swapped
    const Partition partition({0.5});
    const auto m_a = estimate_confusion_matrix(partition, valid, smoothing);
    const auto lin =
        linear_solve_estimate(m_a, observed_cell_frequencies(histogram(partition, field)));
    CHECK(std::abs(lin.p[0] - acc.p[0]) <= 1e-9);
  }
}
