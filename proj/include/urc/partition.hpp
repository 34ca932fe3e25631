#pragma once

#include <vector>

#include "urc/types.hpp"

namespace urc {

/// Observed fraction of field predictions per partition cell.
struct CellFrequencies {
  Vector freqs;

  void validate() const;
};

/// Cutpoints at the empirical i/m-quantiles of the dev class-1 scores,
/// i = 1..m-1, where the quantile is the ceil(i*N/m)-th order statistic.
/// Cells then hold between floor(N/m) and ceil(N/m) dev scores each.
Partition build_equal_mass_partition(const std::vector<double>& dev_scores, std::size_t m);

/// Cell index of a binary prediction (keyed on the class-1 score).
std::size_t assign_cell(const Partition& partition, const ProbabilityVector& prediction);

CellHistogram histogram(const Partition& partition, const UnlabeledPredictionSet& field);

/// Row-stochastic estimate of P(cell j | class i) from labeled dev data with
/// additive smoothing: (count_ij + s) / (class_i total + m*s). Every class
/// must appear at least once.
ConfusionMatrix estimate_confusion_matrix(const Partition& partition,
                                          const LabeledPredictionSet& dev, double smoothing);

CellFrequencies observed_cell_frequencies(const CellHistogram& hist);

}  // namespace urc
