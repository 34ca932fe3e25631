#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "urc/rng.hpp"
#include "urc/types.hpp"

namespace urc {

/// Binary generator in the make_classification style: informative features
/// are standard normal around per-class centroids at +-class_sep on each
/// informative axis, the remaining features are pure noise, and a flip_y
/// fraction of labels is resampled uniformly after the exact class counts
/// are laid down.
struct GeneratorConfig {
  std::int64_t n_samples = 0;
  double prevalence = 0.5;  // fraction of the positive class (label 1)
  int n_features = 4;
  int n_informative = 2;
  double class_sep = 0.4;
  double flip_y = 0.1;
  RngStream rng{0, 0};
};

struct Dataset {
  Matrix features;                 // n_samples x n_features
  std::vector<std::size_t> labels; // 0 = negative, 1 = positive

  std::size_t size() const { return labels.size(); }
};

struct LogisticModel {
  Vector weights;
  double bias = 0.0;
};

Dataset generate(const GeneratorConfig& config);

/// Full-batch gradient descent on the log loss with a small L2 ridge on the
/// weights (bias excluded). Deterministic given the stream.
LogisticModel train_logistic(const Dataset& train, int epochs, double learning_rate,
                             RngStream rng);

/// (1 - sigma(w.x + b), sigma(w.x + b)); the positive class is the second
/// entry.
ProbabilityVector predict(const LogisticModel& model, const Vector& features);

/// Finite discrete population given by per-cell class counts. Every derived
/// quantity (posterior, prior, shifted masses) is exact counting arithmetic,
/// which is what the recalibration identities are tested against. The
/// classifier attached to such a population emits each cell's dev posterior,
/// so it is calibrated on dev by construction, and class-conditional cell
/// distributions are shared between dev and field by construction.
struct PopulationSpec {
  // counts[k] = {class-1 count, class-2 count} in cell k
  std::vector<std::array<std::int64_t, 2>> counts;

  std::size_t cell_count() const { return counts.size(); }
  void validate() const;

  ProbabilityVector dev_posterior(std::size_t cell) const;
  ProbabilityVector dev_prior() const;
  double dev_cell_mass(std::size_t cell) const;

  /// P(cell | class), the quantity held fixed under shift.
  double cell_given_class(std::size_t cell, std::size_t cls) const;

  /// Field-side cell masses under shifted class priors.
  std::vector<double> shifted_cell_masses(const ProbabilityVector& shift) const;

  /// Exact posterior in the shifted population, by counting.
  ProbabilityVector shifted_posterior(std::size_t cell, const ProbabilityVector& shift) const;

  /// Exact expectation of the prediction vector under the shifted population
  /// (what averaging predictions converges to).
  ProbabilityVector naive_expectation(const ProbabilityVector& shift) const;

  /// E[c_1 | class 1] - E[c_1 | class 2] on dev; positive for any classifier
  /// with discriminative power.
  double discrimination() const;
};

struct CalibratedPopulationDraw {
  LabeledPredictionSet dev;
  UnlabeledPredictionSet field;
  ProbabilityVector truth;                // the shifted class prior
  std::vector<std::size_t> field_labels;  // evaluation-only ground truth
};

CalibratedPopulationDraw make_calibrated_population(const PopulationSpec& spec,
                                                    const ProbabilityVector& shift, RngStream rng,
                                                    std::size_t n_dev, std::size_t n_field);

}  // namespace urc
