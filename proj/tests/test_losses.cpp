#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "urc/losses.hpp"

using namespace urc;

namespace {

// Brute-force multinomial probability: enumerate every ordered draw sequence
// and count the ones matching the target histogram.
double enumerated_mass(const std::vector<std::int64_t>& target, const Vector& probs) {
  std::int64_t total = 0;
  for (const auto k : target) total += k;
  double mass = 0.0;
  std::vector<std::size_t> seq(static_cast<std::size_t>(total), 0);
  while (true) {
    std::vector<std::int64_t> counts(target.size(), 0);
    double p = 1.0;
    for (const auto cell : seq) {
      ++counts[cell];
      p *= probs(static_cast<Eigen::Index>(cell));
    }
    if (counts == target) mass += p;
    // odometer increment
    std::size_t pos = 0;
    while (pos < seq.size()) {
      if (++seq[pos] < static_cast<std::size_t>(probs.size())) break;
      seq[pos] = 0;
      ++pos;
    }
    if (pos == seq.size()) break;
  }
  return mass;
}

ConfusionMatrix identity2() {
  ConfusionMatrix m;
  m.probs = Matrix::Identity(2, 2);
  m.class_counts = {1, 1};
  return m;
}

}  // namespace

TEST_CASE("multinomial log mass: worked examples") {
  CHECK(multinomial_log_mass(3, {3, 0}, ProbabilityVector{1.0, 0.0}) == 0.0);

  const double two_draws = multinomial_log_mass(2, {1, 1}, ProbabilityVector{0.5, 0.5});
  CHECK(two_draws == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(std::exp(two_draws) ==
        doctest::Approx(enumerated_mass({1, 1}, Vector{{0.5, 0.5}})).epsilon(1e-12));

  const double three_draws = multinomial_log_mass(3, {2, 1}, ProbabilityVector{0.5, 0.5});
  CHECK(three_draws == doctest::Approx(std::log(0.375)).epsilon(1e-12));
  CHECK(std::exp(three_draws) ==
        doctest::Approx(enumerated_mass({2, 1}, Vector{{0.5, 0.5}})).epsilon(1e-12));

  // zero probability with positive count
  CHECK(multinomial_log_mass(2, {1, 1}, ProbabilityVector{1.0, 0.0}) == kLogMassFloor);

  CHECK_THROWS_WITH_AS(multinomial_log_mass(2, {1, 1, 0}, ProbabilityVector{0.5, 0.5}),
                       doctest::Contains("ShapeMismatch"), Error);
  CHECK_THROWS_WITH_AS(multinomial_log_mass(3, {1, 1}, ProbabilityVector{0.5, 0.5}),
                       doctest::Contains("CountMismatch"), Error);
}

TEST_CASE("multinomial log mass: exhaustive normalization") {
  RngStream rng(31, 0);
  for (std::size_t m = 2; m <= 3; ++m) {
    for (std::int64_t total = 0; total <= 6; ++total) {
      const auto probs = testutil::random_interior_point(rng, static_cast<Eigen::Index>(m));
      double sum = 0.0;
      testutil::enumerate_counts(total, m, [&](const std::vector<std::int64_t>& counts) {
        sum += std::exp(multinomial_log_mass(total, counts, probs));
      });
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("nll loss: worked examples") {
  CHECK(nll_loss(CellHistogram::from_counts({1, 1}), identity2(), ProbabilityVector{0.5, 0.5}) ==
        doctest::Approx(-std::log(0.5)).epsilon(1e-12));

  CHECK(nll_loss(CellHistogram::from_counts({0, 0}), identity2(), ProbabilityVector{0.3, 0.7}) ==
        0.0);

  CHECK(nll_loss(CellHistogram::from_counts({2, 0}), identity2(), ProbabilityVector{1.0, 0.0}) ==
        0.0);

  // vanishing mass maps to the ceiling sentinel
  CHECK(nll_loss(CellHistogram::from_counts({0, 2}), identity2(), ProbabilityVector{1.0, 0.0}) ==
        kLossCeiling);
}

TEST_CASE("kl regularizer: worked examples") {
  const ProbabilityVector prior{0.5, 0.5};
  CHECK(kl_regularizer(prior, prior, 3.0) == 0.0);
  CHECK(kl_regularizer(ProbabilityVector{1.0, 0.0}, prior, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(kl_regularizer(ProbabilityVector{0.5, 0.5}, ProbabilityVector{0.25, 0.75}, 1.0) ==
        doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(
      kl_regularizer(prior, ProbabilityVector{1.0, 0.0}, 1.0),
      doctest::Contains("ZeroPriorCoordinate"), Error);
}

TEST_CASE("kl regularizer: non-negative, zero only at the prior") {
  RngStream rng(32, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(4));
    const auto p = testutil::random_interior_point(rng, n);
    const auto prior = testutil::random_interior_point(rng, n);
    const double kl = kl_regularizer(p, prior, 1.0);
    CHECK(kl >= 0.0);
    if (kl <= 1e-12) {
      CHECK((p.values() - prior.values()).cwiseAbs().maxCoeff() < 1e-5);
    }
    CHECK(kl_regularizer(p, p, 1.0) <= 1e-12);
  }
}

TEST_CASE("continuity regularizer: worked examples") {
  CHECK(continuity_regularizer(ProbabilityVector{0.25, 0.25, 0.25, 0.25}, 7.0) == 0.0);
  CHECK(continuity_regularizer(ProbabilityVector{1.0, 0.0}, 1.0) == 1.0);
  CHECK(continuity_regularizer(ProbabilityVector{0.5, 0.3, 0.2}, 2.0) ==
        doctest::Approx(0.10).epsilon(1e-12));
}

TEST_CASE("combined loss: additive structure") {
  RngStream rng(33, 0);
  const auto m_a = testutil::random_confusion(rng, 2, 4);
  const auto hist =
      testutil::multinomial_draw(rng, 200, m_a.probs.transpose() * Vector{{0.4, 0.6}});
  const auto p = testutil::random_interior_point(rng, 2);

  LossConfig bare;
  bare.kl_weight = 0.0;
  bare.prior = ProbabilityVector{0.5, 0.5};
  CHECK(combined_loss_and_gradient(hist, m_a, p, bare).value ==
        doctest::Approx(nll_loss(hist, m_a, p)).epsilon(1e-12));

  LossConfig reg;
  reg.kl_weight = 1.0;
  reg.prior = ProbabilityVector{0.3, 0.7};
  const auto empty = CellHistogram::from_counts({0, 0, 0, 0});
  CHECK(combined_loss_and_gradient(empty, m_a, p, reg).value ==
        doctest::Approx(kl_regularizer(p, reg.prior, 1.0)).epsilon(1e-12));
}

TEST_CASE("combined loss: gradient matches central differences") {
  RngStream rng(34, 0);
  int tested = 0;
  const Eigen::Index class_sizes[] = {2, 3, 5};
  const Eigen::Index cell_sizes[] = {2, 4, 8};
  while (tested < 100) {
    const Eigen::Index n = class_sizes[rng.next_index(3)];
    const Eigen::Index m = cell_sizes[rng.next_index(3)];
    const auto m_a = testutil::random_confusion(rng, n, m);
    const auto truth = testutil::random_interior_point(rng, n);
    const auto hist =
        testutil::multinomial_draw(rng, 50 + static_cast<std::int64_t>(rng.next_below(400)),
                                   m_a.probs.transpose() * truth.values());
    LossConfig config;
    config.kl_weight = rng.next_double() * 2.0;
    config.continuity_weight = rng.next_double();
    config.prior = testutil::random_interior_point(rng, n);

    const Vector p = testutil::random_interior_point(rng, n, 0.05).values();
    const auto at = detail::combined_loss_and_gradient_raw(hist, m_a, p, config);

    constexpr double h = 1e-6;
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector hi = p, lo = p;
      hi(i) += h;
      lo(i) -= h;
      const double fd = (detail::combined_loss_and_gradient_raw(hist, m_a, hi, config).value -
                         detail::combined_loss_and_gradient_raw(hist, m_a, lo, config).value) /
                        (2.0 * h);
      CHECK(std::abs(fd - at.gradient(i)) <= 1e-4 * std::max(1.0, std::abs(at.gradient(i))));
    }
    ++tested;
  }
}

TEST_CASE("nll loss: midpoint convexity along random segments") {
  RngStream rng(35, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(3));
    const auto m = static_cast<Eigen::Index>(n + rng.next_index(4));
    const auto m_a = testutil::random_confusion(rng, n, m);
    const auto truth = testutil::random_interior_point(rng, n);
    const auto hist =
        testutil::multinomial_draw(rng, 1 + static_cast<std::int64_t>(rng.next_below(500)),
                                   m_a.probs.transpose() * truth.values());
    const auto a = testutil::random_interior_point(rng, n);
    const auto b = testutil::random_interior_point(rng, n);
    const auto mid = normalize((0.5 * (a.values() + b.values())).eval());
    CHECK(nll_loss(hist, m_a, mid) <=
          0.5 * (nll_loss(hist, m_a, a) + nll_loss(hist, m_a, b)) + 1e-9);
  }
}
