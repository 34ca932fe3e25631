#include "urc/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace urc {

Dataset generate(const GeneratorConfig& config) {
  require(config.n_samples >= 2, ErrorCode::InvalidConfig, "need at least two samples");
  require(config.prevalence > 0.0 && config.prevalence < 1.0, ErrorCode::InvalidConfig,
          "prevalence must be in (0, 1)");
  require(config.n_features >= 1, ErrorCode::InvalidConfig, "need at least one feature");
  require(config.n_informative >= 1 && config.n_informative <= config.n_features,
          ErrorCode::InvalidConfig, "informative count out of range");
  require(config.flip_y >= 0.0 && config.flip_y <= 1.0, ErrorCode::InvalidConfig,
          "flip fraction out of range");
  const auto n = config.n_samples;
  const auto n_pos = std::llround(config.prevalence * static_cast<double>(n));
  require(n_pos >= 1 && n_pos <= n - 1, ErrorCode::InvalidConfig,
          "prevalence rounds to an empty class");

  RngStream rng = config.rng;

  // Exact class counts first, then a shuffle; flips happen on top of that.
  std::vector<std::size_t> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), std::size_t{1});
  for (std::size_t i = labels.size() - 1; i > 0; --i) {
    std::swap(labels[i], labels[rng.next_index(i + 1)]);
  }
  for (auto& y : labels) {
    if (rng.next_double() < config.flip_y) {
      y = rng.next_index(2);
    }
  }

  Dataset out;
  out.features = Matrix(n, config.n_features);
  for (std::int64_t s = 0; s < n; ++s) {
    const double centroid = labels[static_cast<std::size_t>(s)] == 1 ? config.class_sep
                                                                     : -config.class_sep;
    for (int f = 0; f < config.n_features; ++f) {
      const double shift = f < config.n_informative ? centroid : 0.0;
      out.features(s, f) = shift + rng.next_normal();
    }
  }
  out.labels = std::move(labels);
  return out;
}

LogisticModel train_logistic(const Dataset& train, int epochs, double learning_rate,
                             RngStream rng) {
  require(train.size() >= 2, ErrorCode::EmptySample, "need at least two samples");
  require(epochs >= 1 && learning_rate > 0.0, ErrorCode::InvalidConfig,
          "bad training configuration");
  bool has0 = false, has1 = false;
  for (const auto y : train.labels) (y == 0 ? has0 : has1) = true;
  require(has0 && has1, ErrorCode::SingleClass, "training data contains one class only");

  const auto n = static_cast<Eigen::Index>(train.size());
  const Eigen::Index d = train.features.cols();
  constexpr double kRidge = 1e-4;

  LogisticModel model;
  model.weights = Vector(d);
  for (Eigen::Index j = 0; j < d; ++j) model.weights(j) = 1e-3 * rng.next_normal();
  model.bias = 0.0;

  Vector target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    target(i) = train.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
  }

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Vector margin = train.features * model.weights;
    margin.array() += model.bias;
    const Vector residual =
        (1.0 / (1.0 + (-margin.array()).exp())) - target.array();
    Vector grad_w = train.features.transpose() * residual / static_cast<double>(n);
    grad_w += kRidge * model.weights;
    const double grad_b = residual.sum() / static_cast<double>(n);
    model.weights -= learning_rate * grad_w;
    model.bias -= learning_rate * grad_b;
  }
  return model;
}

ProbabilityVector predict(const LogisticModel& model, const Vector& features) {
  require(features.size() == model.weights.size(), ErrorCode::ShapeMismatch,
          "feature length differs from model");
  const double sigma = 1.0 / (1.0 + std::exp(-(model.weights.dot(features) + model.bias)));
  Vector p(2);
  p << 1.0 - sigma, sigma;
  return normalize(p);
}

void PopulationSpec::validate() const {
  require(counts.size() >= 1, ErrorCode::InconsistentSpec, "population needs at least one cell");
  std::int64_t total0 = 0, total1 = 0;
  for (const auto& c : counts) {
    require(c[0] >= 0 && c[1] >= 0, ErrorCode::InconsistentSpec, "negative cell count");
    require(c[0] + c[1] > 0, ErrorCode::InconsistentSpec, "empty population cell");
    total0 += c[0];
    total1 += c[1];
  }
  require(total0 > 0 && total1 > 0, ErrorCode::InconsistentSpec,
          "every class needs population mass");
}

ProbabilityVector PopulationSpec::dev_posterior(std::size_t cell) const {
  const auto& c = counts.at(cell);
  Vector p(2);
  const auto total = static_cast<double>(c[0] + c[1]);
  p << static_cast<double>(c[0]) / total, static_cast<double>(c[1]) / total;
  return normalize(p);
}

ProbabilityVector PopulationSpec::dev_prior() const {
  double total0 = 0, total1 = 0;
  for (const auto& c : counts) {
    total0 += static_cast<double>(c[0]);
    total1 += static_cast<double>(c[1]);
  }
  Vector p(2);
  p << total0 / (total0 + total1), total1 / (total0 + total1);
  return normalize(p);
}

double PopulationSpec::dev_cell_mass(std::size_t cell) const {
  double total = 0;
  for (const auto& c : counts) total += static_cast<double>(c[0] + c[1]);
  const auto& c = counts.at(cell);
  return static_cast<double>(c[0] + c[1]) / total;
}

double PopulationSpec::cell_given_class(std::size_t cell, std::size_t cls) const {
  require(cls < 2, ErrorCode::BadLength, "class out of range");
  double class_total = 0;
  for (const auto& c : counts) class_total += static_cast<double>(c[cls]);
  return static_cast<double>(counts.at(cell)[cls]) / class_total;
}

std::vector<double> PopulationSpec::shifted_cell_masses(const ProbabilityVector& shift) const {
  require(shift.size() == 2, ErrorCode::ShapeMismatch, "binary population");
  std::vector<double> masses(counts.size(), 0.0);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    masses[k] = shift[0] * cell_given_class(k, 0) + shift[1] * cell_given_class(k, 1);
  }
  return masses;
}

ProbabilityVector PopulationSpec::shifted_posterior(std::size_t cell,
                                                    const ProbabilityVector& shift) const {
  const double joint0 = shift[0] * cell_given_class(cell, 0);
  const double joint1 = shift[1] * cell_given_class(cell, 1);
  Vector p(2);
  p << joint0, joint1;
  return normalize(p);
}

ProbabilityVector PopulationSpec::naive_expectation(const ProbabilityVector& shift) const {
  const auto masses = shifted_cell_masses(shift);
  Vector mean = Vector::Zero(2);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    mean += masses[k] * dev_posterior(k).values();
  }
  return normalize(mean);
}

double PopulationSpec::discrimination() const {
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double c1 = dev_posterior(k)[0];
    e1 += cell_given_class(k, 0) * c1;
    e2 += cell_given_class(k, 1) * c1;
  }
  return e1 - e2;
}

namespace {

std::size_t draw_categorical(RngStream& rng, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.next_double() * total;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    u -= weights[k];
    if (u < 0.0) return k;
  }
  return weights.size() - 1;
}

}  // namespace

CalibratedPopulationDraw make_calibrated_population(const PopulationSpec& spec,
                                                    const ProbabilityVector& shift, RngStream rng,
                                                    std::size_t n_dev, std::size_t n_field) {
  spec.validate();
  require(shift.size() == 2, ErrorCode::ShapeMismatch, "binary population");
  require(shift[0] > 0.0 && shift[1] > 0.0, ErrorCode::InconsistentSpec,
          "shift must keep both classes present");
  require(n_dev > 0 && n_field > 0, ErrorCode::InvalidConfig, "empty draw requested");

  const std::size_t cells = spec.cell_count();
  std::vector<double> dev_masses(cells);
  for (std::size_t k = 0; k < cells; ++k) dev_masses[k] = spec.dev_cell_mass(k);
  std::vector<ProbabilityVector> posteriors;
  posteriors.reserve(cells);
  for (std::size_t k = 0; k < cells; ++k) posteriors.push_back(spec.dev_posterior(k));

  CalibratedPopulationDraw out;
  out.truth = shift;

  out.dev.rows.reserve(n_dev);
  for (std::size_t i = 0; i < n_dev; ++i) {
    const std::size_t cell = draw_categorical(rng, dev_masses);
    const std::size_t label = rng.next_double() < posteriors[cell][0] ? 0 : 1;
    out.dev.rows.push_back(
        {"dev-" + std::to_string(i + 1), std::nullopt, posteriors[cell], label});
  }

  // Field: class from the shifted prior, cell from the class-conditional cell
  // distribution shared with dev.
  std::vector<std::vector<double>> cell_given_class(2, std::vector<double>(cells));
  for (std::size_t y = 0; y < 2; ++y) {
    for (std::size_t k = 0; k < cells; ++k) cell_given_class[y][k] = spec.cell_given_class(k, y);
  }
  out.field.rows.reserve(n_field);
  out.field_labels.reserve(n_field);
  for (std::size_t i = 0; i < n_field; ++i) {
    const std::size_t label = rng.next_double() < shift[0] ? 0 : 1;
    const std::size_t cell = draw_categorical(rng, cell_given_class[label]);
    out.field.rows.push_back({"field-" + std::to_string(i + 1), std::nullopt, posteriors[cell]});
    out.field_labels.push_back(label);
  }
  return out;
}

}  // namespace urc
