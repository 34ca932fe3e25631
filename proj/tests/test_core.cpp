#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "testutil.hpp"
#include "urc/simplex.hpp"
#include "urc/types.hpp"

using namespace urc;

TEST_CASE("normalize: worked examples") {
  const auto a = normalize(Vector{{0.45, 0.15}});  // exact rational: 0.45/0.60 = 0.75
  CHECK(a[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(0.25).epsilon(1e-12));

  const auto b = normalize(Vector{{1.0, 0.0}});
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);

  const auto c = normalize(Vector{{2.0, 2.0, 2.0}});
  for (int i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("normalize: error paths") {
  CHECK_THROWS_WITH_AS(normalize(Vector{{0.0, 0.0}}), doctest::Contains("AllZero"), Error);
  CHECK_THROWS_WITH_AS(normalize(Vector{{0.5, -0.1}}), doctest::Contains("NegativeEntry"), Error);
  CHECK_THROWS_AS(normalize(Vector{{1.0}}), Error);
}

TEST_CASE("normalize: exactly idempotent") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(7));
    Vector raw(n);
    for (Eigen::Index i = 0; i < n; ++i) raw(i) = rng.next_double() * 10.0;
    if (raw.maxCoeff() == 0.0) raw(0) = 1.0;
    const auto once = normalize(raw);
    const auto twice = normalize(once.values());
    CHECK(once.values() == twice.values());
  }
}

TEST_CASE("normalize: scale invariant within 1e-12") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(5));
    Vector raw(n);
    for (Eigen::Index i = 0; i < n; ++i) raw(i) = 0.01 + rng.next_double();
    const double k = std::exp((rng.next_double() - 0.5) * 20.0);
    const auto base = normalize(raw);
    const auto scaled = normalize((k * raw).eval());
    CHECK((base.values() - scaled.values()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("probability vector construction tolerates drift but rejects bad sums") {
  const ProbabilityVector ok(Vector{{0.5 + 2e-7, 0.5}});
  CHECK(simplex::seq_sum(ok.values()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(ProbabilityVector(Vector{{0.6, 0.5}}), doctest::Contains("NotNormalized"),
                       Error);
  CHECK_THROWS_AS(ProbabilityVector(Vector{{0.5}}), Error);
}

TEST_CASE("argmax_class: examples and tie break") {
  CHECK(argmax_class(ProbabilityVector{0.3, 0.7}) == 1);   // second class
  CHECK(argmax_class(ProbabilityVector{0.5, 0.5}) == 0);   // tie -> lowest index
  CHECK(argmax_class(ProbabilityVector{0.2, 0.5, 0.3}) == 1);
}

TEST_CASE("argmax_class: permutation equivariance at unique maxima") {
  RngStream rng(13, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.next_index(5));
    const auto p = testutil::random_interior_point(rng, n);

    // Only test when the maximum is unique.
    double best = -1.0;
    int best_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p[i] > best) {
        best = p[i];
        best_count = 1;
      } else if (p[i] == best) {
        ++best_count;
      }
    }
    if (best_count != 1) continue;

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_index(i + 1)]);
    }
    Vector shuffled(n);
    for (Eigen::Index i = 0; i < n; ++i) shuffled(perm[static_cast<std::size_t>(i)]) = p[i];

    const std::size_t direct = argmax_class(ProbabilityVector(shuffled));
    CHECK(direct == static_cast<std::size_t>(perm[argmax_class(p)]));
  }
}

TEST_CASE("rng streams replay and separate") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 8);
  int differing = 0;
  RngStream a2(42, 7);
  for (int i = 0; i < 100; ++i) {
    if (a2.next_u64() != c.next_u64()) ++differing;
  }
  CHECK(differing > 90);

  RngStream d(42, 7);
  std::set<std::uint64_t> draws;
  for (int i = 0; i < 1000; ++i) draws.insert(d.next_below(1000));
  CHECK(*draws.rbegin() < 1000);

  RngStream e(42, 9);
  double mean = 0.0, var = 0.0;
  constexpr int kDraws = 20000;
  for (int i = 0; i < kDraws; ++i) {
    const double z = e.next_normal();
    mean += z;
    var += z * z;
  }
  mean /= kDraws;
  var = var / kDraws - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}
