#include "urc/losses.hpp"

#include <cmath>

#include "urc/simplex.hpp"

namespace urc {

namespace detail {

double multinomial_log_mass_raw(std::int64_t total, const std::vector<std::int64_t>& counts,
                                const Vector& cell_probs) {
  require(static_cast<Eigen::Index>(counts.size()) == cell_probs.size(), ErrorCode::ShapeMismatch,
          "count/probability length mismatch");
  std::int64_t sum = 0;
  for (const auto k : counts) {
    require(k >= 0, ErrorCode::CountMismatch, "negative count");
    sum += k;
  }
  require(sum == total, ErrorCode::CountMismatch, "counts do not sum to total");

  double log_coef = std::lgamma(static_cast<double>(total) + 1.0);
  double log_prob = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    log_coef -= std::lgamma(static_cast<double>(counts[j]) + 1.0);
    if (counts[j] > 0) {
      const double q = cell_probs(static_cast<Eigen::Index>(j));
      if (q <= 0.0) return kLogMassFloor;
      log_prob += static_cast<double>(counts[j]) * std::log(q);
    }
  }
  return log_coef + log_prob;
}

LossValue combined_loss_and_gradient_raw(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                         const Vector& p, const LossConfig& config) {
  const Eigen::Index n = m_a.probs.rows();
  const Eigen::Index m = m_a.probs.cols();
  require(p.size() == n, ErrorCode::ShapeMismatch, "class distribution length differs from rows");
  require(static_cast<Eigen::Index>(hist.counts.size()) == m, ErrorCode::ShapeMismatch,
          "histogram length differs from columns");
  require(config.kl_weight >= 0.0 && config.continuity_weight >= 0.0, ErrorCode::InvalidConfig,
          "regularizer weights must be non-negative");

  LossValue out;
  out.gradient = Vector::Zero(n);

  const Vector q = m_a.probs.transpose() * p;
  const double log_mass = multinomial_log_mass_raw(hist.total, hist.counts, q);
  if (log_mass == kLogMassFloor) {
    out.value = kLossCeiling;
    return out;
  }
  out.value = -log_mass;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (hist.counts[static_cast<std::size_t>(j)] > 0) {
      const double w = static_cast<double>(hist.counts[static_cast<std::size_t>(j)]) / q(j);
      out.gradient -= w * m_a.probs.col(j);
    }
  }

  if (config.kl_weight > 0.0) {
    const auto& prior = config.prior.values();
    require(prior.size() == n, ErrorCode::ShapeMismatch, "prior length differs from classes");
    for (Eigen::Index i = 0; i < n; ++i) {
      require(prior(i) > 0.0, ErrorCode::ZeroPriorCoordinate, "prior has a zero coordinate");
    }
    out.value += config.kl_weight * simplex::kl_divergence(p, prior);
    for (Eigen::Index i = 0; i < n; ++i) {
      out.gradient(i) += config.kl_weight * (std::log(p(i) / prior(i)) + 1.0);
    }
  }

  if (config.continuity_weight > 0.0) {
    double c = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double d = p(i) - p(i + 1);
      c += d * d;
      out.gradient(i) += config.continuity_weight * 2.0 * d;
      out.gradient(i + 1) -= config.continuity_weight * 2.0 * d;
    }
    out.value += config.continuity_weight * c;
  }

  return out;
}

}  // namespace detail

double multinomial_log_mass(std::int64_t total, const std::vector<std::int64_t>& counts,
                            const ProbabilityVector& cell_probs) {
  return detail::multinomial_log_mass_raw(total, counts, cell_probs.values());
}

double nll_loss(const CellHistogram& hist, const ConfusionMatrix& m_a,
                const ProbabilityVector& p) {
  require(p.size() == m_a.probs.rows(), ErrorCode::ShapeMismatch,
          "class distribution length differs from rows");
  require(static_cast<Eigen::Index>(hist.counts.size()) == m_a.probs.cols(),
          ErrorCode::ShapeMismatch, "histogram length differs from columns");
  const Vector q = m_a.probs.transpose() * p.values();
  const double log_mass = detail::multinomial_log_mass_raw(hist.total, hist.counts, q);
  return log_mass == kLogMassFloor ? kLossCeiling : -log_mass;
}

double kl_regularizer(const ProbabilityVector& p, const ProbabilityVector& prior, double weight) {
  require(weight >= 0.0, ErrorCode::InvalidConfig, "weight must be non-negative");
  require(p.size() == prior.size(), ErrorCode::ShapeMismatch, "length mismatch");
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    require(prior[i] > 0.0, ErrorCode::ZeroPriorCoordinate, "prior has a zero coordinate");
  }
  return weight * simplex::kl_divergence(p.values(), prior.values());
}

double continuity_regularizer(const ProbabilityVector& p, double weight) {
  require(weight >= 0.0, ErrorCode::InvalidConfig, "weight must be non-negative");
  double c = 0.0;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    const double d = p[i] - p[i + 1];
    c += d * d;
  }
  return weight * c;
}

LossValue combined_loss_and_gradient(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                     const ProbabilityVector& p, const LossConfig& config) {
  return detail::combined_loss_and_gradient_raw(hist, m_a, p.values(), config);
}

}  // namespace urc
