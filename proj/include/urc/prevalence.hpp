#pragma once

#include <optional>
#include <string>

#include "urc/losses.hpp"
#include "urc/partition.hpp"
#include "urc/types.hpp"

namespace urc {

enum class EstimateMethod { naive, linear, map, cc, acc, em };

const char* to_string(EstimateMethod method);

struct MapConfig {
  LossConfig loss;
  int max_iterations = 5000;
  double tolerance = 1e-10;  // on loss decrease
  double step_init = 0.1;
};

struct PrevalenceEstimate {
  ProbabilityVector p;
  EstimateMethod method = EstimateMethod::naive;
  std::optional<double> final_loss;
  std::optional<int> iterations_used;
  bool converged = false;
  std::optional<double> condition_number;  // linear solves report this diagnostic
};

/// Mean of the field prediction vectors. Biased toward the dev prior under
/// shift; kept as the comparison point the MAP estimator improves on.
PrevalenceEstimate naive_estimate(const UnlabeledPredictionSet& field);

/// Least-squares solution of M^T p = v (exact when m = n), clipped to [0, 1]
/// and rescaled. `converged` reports whether the raw solution was already on
/// the simplex within 1e-9.
PrevalenceEstimate linear_solve_estimate(const ConfusionMatrix& m_a, const CellFrequencies& v_a);

/// Approximate minimizer of the combined loss over the simplex interior:
/// gradient descent with backtracking line search on a softmax
/// parametrization (last logit pinned to zero), started at the prior.
/// Deterministic given inputs. Non-convergence is reported via the flag,
/// never as an error.
PrevalenceEstimate map_estimate(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                const MapConfig& config);

}  // namespace urc
