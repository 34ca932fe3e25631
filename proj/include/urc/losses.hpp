#pragma once

#include <cstdint>
#include <vector>

#include "urc/types.hpp"

namespace urc {

/// Log-mass sentinel standing in for -inf: keeps the optimizer's arithmetic
/// total, and any candidate touching it is rejected by line search.
inline constexpr double kLogMassFloor = -1e300;
inline constexpr double kLossCeiling = 1e300;

struct LossConfig {
  double kl_weight = 1.0;         // scales the divergence from `prior`
  double continuity_weight = 0.0; // adjacent-difference penalty, ordered outputs only
  ProbabilityVector prior;        // reference distribution, normally the dev class prior
};

/// Log of the multinomial mass function, coefficient included.
/// Returns kLogMassFloor iff some probs[j] = 0 with counts[j] > 0.
double multinomial_log_mass(std::int64_t total, const std::vector<std::int64_t>& counts,
                            const ProbabilityVector& cell_probs);

/// Negative log-likelihood of the observed cell histogram under class
/// distribution p: -log B(total, counts, M^T p). kLossCeiling when the mass
/// vanishes.
double nll_loss(const CellHistogram& hist, const ConfusionMatrix& m_a,
                const ProbabilityVector& p);

double kl_regularizer(const ProbabilityVector& p, const ProbabilityVector& prior, double weight);

double continuity_regularizer(const ProbabilityVector& p, double weight);

struct LossValue {
  double value = 0.0;
  Vector gradient;  // w.r.t. raw p; optimizers chain-rule through their parametrization
};

LossValue combined_loss_and_gradient(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                     const ProbabilityVector& p, const LossConfig& config);

namespace detail {

// Raw-vector variants used by the optimizer's inner loop; `p`/`cell_probs`
// are trusted to lie on the simplex.
double multinomial_log_mass_raw(std::int64_t total, const std::vector<std::int64_t>& counts,
                                const Vector& cell_probs);
LossValue combined_loss_and_gradient_raw(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                         const Vector& p, const LossConfig& config);

}  // namespace detail

}  // namespace urc
