#pragma once

#include <vector>

#include "urc/prevalence.hpp"

namespace urc {

/// Hard-classifier confusion: entry (i, k) = P(argmax = k | Y = i),
/// estimated on labeled validation data.
struct HardConfusion {
  Matrix probs;  // n x n, rows sum to 1

  Eigen::Index n_classes() const { return probs.rows(); }
  void validate() const;
};

struct EmConfig {
  int max_iterations = 3000;
  double tolerance = 1e-10;  // sup-norm change of the prevalence iterate
};

HardConfusion estimate_hard_confusion(const LabeledPredictionSet& validation, double smoothing);

/// Fraction of samples hard-classified into each class.
PrevalenceEstimate classify_and_count(const UnlabeledPredictionSet& field);

/// Classify-and-count corrected through the hard confusion matrix:
/// least-squares solve of (hard_conf)^T p = cc, clipped to the simplex.
/// In the binary case this is (cc - fpr) / (tpr - fpr).
PrevalenceEstimate adjusted_classify_and_count(const UnlabeledPredictionSet& field,
                                               const HardConfusion& hard_conf);

/// Fixed-point iteration: each step recalibrates every prediction by the
/// current prior ratio and averages. `marginal_ll_trace`, when given,
/// receives the field marginal log-likelihood at the start point and after
/// every update.
PrevalenceEstimate expectation_maximization(const UnlabeledPredictionSet& field,
                                            const ProbabilityVector& dev_prior,
                                            const ProbabilityVector& start,
                                            const EmConfig& config,
                                            std::vector<double>* marginal_ll_trace = nullptr);

/// sum_s log(sum_i c_i(s) p_i / dev_prior_i) — the objective EM ascends,
/// free of per-sample normalizing constants.
double em_marginal_log_likelihood(const UnlabeledPredictionSet& field,
                                  const ProbabilityVector& dev_prior,
                                  const ProbabilityVector& p);

}  // namespace urc
