#include "urc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "urc/losses.hpp"

namespace urc {

namespace {

void check_binary_inputs(const std::vector<ProbabilityVector>& predictions,
                         const std::vector<std::size_t>& labels) {
  require(!predictions.empty(), ErrorCode::EmptySample, "no predictions");
  require(predictions.size() == labels.size(), ErrorCode::LengthMismatch,
          "predictions and labels differ in length");
  for (const auto& p : predictions) {
    require(p.size() == 2, ErrorCode::ShapeMismatch, "binary metric on non-binary predictions");
  }
  for (const auto y : labels) {
    require(y < 2, ErrorCode::BadLength, "label out of range");
  }
}

int bin_of(double score, int n_bins) {
  const int k = static_cast<int>(std::floor(score * n_bins));
  return std::clamp(k, 0, n_bins - 1);
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double clamped_logit(double s) {
  s = std::clamp(s, 1e-9, 1.0 - 1e-9);
  return std::log(s / (1.0 - s));
}

}  // namespace

double brier_score(const std::vector<ProbabilityVector>& predictions,
                   const std::vector<std::size_t>& labels) {
  check_binary_inputs(predictions, labels);
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double target = labels[i] == 0 ? 1.0 : 0.0;
    const double d = predictions[i][0] - target;
    s += d * d;
  }
  return s / static_cast<double>(predictions.size());
}

double multiclass_brier_score(const std::vector<ProbabilityVector>& predictions,
                              const std::vector<std::size_t>& labels) {
  require(!predictions.empty(), ErrorCode::EmptySample, "no predictions");
  require(predictions.size() == labels.size(), ErrorCode::LengthMismatch,
          "predictions and labels differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (Eigen::Index k = 0; k < predictions[i].size(); ++k) {
      const double target = labels[i] == static_cast<std::size_t>(k) ? 1.0 : 0.0;
      const double d = predictions[i][k] - target;
      s += d * d;
    }
  }
  return s / static_cast<double>(predictions.size());
}

std::vector<ReliabilityBin> reliability_table(const std::vector<ProbabilityVector>& predictions,
                                              const std::vector<std::size_t>& labels, int n_bins) {
  check_binary_inputs(predictions, labels);
  require(n_bins >= 1, ErrorCode::InvalidConfig, "need at least one bin");
  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto& b = bins[static_cast<std::size_t>(bin_of(predictions[i][0], n_bins))];
    ++b.count;
    b.mean_prediction += predictions[i][0];
    b.event_rate += labels[i] == 0 ? 1.0 : 0.0;
  }
  for (auto& b : bins) {
    if (b.count > 0) {
      b.mean_prediction /= static_cast<double>(b.count);
      b.event_rate /= static_cast<double>(b.count);
    }
  }
  return bins;
}

BrierDecomposition brier_decomposition(const std::vector<ProbabilityVector>& predictions,
                                       const std::vector<std::size_t>& labels, int n_bins) {
  const auto bins = reliability_table(predictions, labels, n_bins);
  const auto n = static_cast<double>(predictions.size());

  BrierDecomposition out;
  out.bins = n_bins;
  out.brier = brier_score(predictions, labels);
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    const double w = static_cast<double>(b.count) / n;
    const double gap = b.mean_prediction - b.event_rate;
    out.calibration += w * gap * gap;
    out.refinement += w * b.event_rate * (1.0 - b.event_rate);
  }
  return out;
}

PerSampleNll nll_per_sample(const std::vector<ProbabilityVector>& predictions,
                            const std::vector<std::size_t>& labels) {
  require(!predictions.empty(), ErrorCode::EmptySample, "no predictions");
  require(predictions.size() == labels.size(), ErrorCode::LengthMismatch,
          "predictions and labels differ in length");
  PerSampleNll out;
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double c = predictions[i][static_cast<Eigen::Index>(labels[i])];
    if (c <= 0.0) {
      s += kLossCeiling;
      out.hit_zero = true;
    } else {
      s += -std::log(c);
    }
  }
  out.value = s / static_cast<double>(predictions.size());
  return out;
}

HardMetrics accuracy_and_precision(const std::vector<ProbabilityVector>& predictions,
                                   const std::vector<std::size_t>& labels) {
  require(!predictions.empty(), ErrorCode::EmptySample, "no predictions");
  require(predictions.size() == labels.size(), ErrorCode::LengthMismatch,
          "predictions and labels differ in length");
  const auto n = static_cast<std::size_t>(predictions.front().size());

  std::vector<std::int64_t> predicted(n, 0), correct(n, 0);
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const std::size_t k = argmax_class(predictions[i]);
    ++predicted[k];
    if (k == labels[i]) {
      ++correct[k];
      ++hits;
    }
  }

  HardMetrics out;
  out.accuracy = static_cast<double>(hits) / static_cast<double>(predictions.size());
  out.precision.resize(n, 0.0);
  out.precision_defined.resize(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (predicted[k] > 0) {
      out.precision[k] = static_cast<double>(correct[k]) / static_cast<double>(predicted[k]);
      out.precision_defined[k] = true;
    }
  }
  return out;
}

PlattParams platt_fit(const std::vector<double>& scores, const std::vector<std::size_t>& labels) {
  require(!scores.empty(), ErrorCode::EmptySample, "no scores");
  require(scores.size() == labels.size(), ErrorCode::LengthMismatch,
          "scores and labels differ in length");
  bool has0 = false, has1 = false;
  for (const auto y : labels) {
    require(y < 2, ErrorCode::BadLength, "label out of range");
    (y == 0 ? has0 : has1) = true;
  }
  require(has0 && has1, ErrorCode::SingleClass, "both classes required for the fit");

  std::vector<double> x(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) x[i] = clamped_logit(scores[i]);

  const auto nll = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = a * x[i] + b;
      // -log sigma(t) for targets, -log(1 - sigma(t)) otherwise, in the
      // overflow-safe log1p form
      s += labels[i] == 0 ? std::log1p(std::exp(-std::abs(t))) + std::max(-t, 0.0)
                          : std::log1p(std::exp(-std::abs(t))) + std::max(t, 0.0);
    }
    return s;
  };

  double a = 1.0, b = 0.0;
  double cur = nll(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double g0 = 0.0, g1 = 0.0, h00 = 1e-9, h01 = 0.0, h11 = 1e-9;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double mu = sigmoid(a * x[i] + b);
      const double t = labels[i] == 0 ? 1.0 : 0.0;
      const double r = mu - t;
      const double w = std::max(mu * (1.0 - mu), 1e-12);
      g0 += r * x[i];
      g1 += r;
      h00 += w * x[i] * x[i];
      h01 += w * x[i];
      h11 += w;
    }
    if (std::max(std::abs(g0), std::abs(g1)) < 1e-10) break;

    const double det = h00 * h11 - h01 * h01;
    const double da = (h11 * g0 - h01 * g1) / det;
    const double db = (h00 * g1 - h01 * g0) / det;

    double step = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 50; ++halving) {
      const double v = nll(a - step * da, b - step * db);
      if (v < cur) {
        a -= step * da;
        b -= step * db;
        cur = v;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {a, b};
}

double platt_apply(const PlattParams& params, double score) {
  return sigmoid(params.slope * clamped_logit(score) + params.intercept);
}

}  // namespace urc
