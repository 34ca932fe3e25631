#pragma once

#include <Eigen/Core>

#include <cmath>

namespace urc::simplex {

/// Strict left-to-right summation. Eigen's .sum() may reassociate; the
/// simplex invariants below are defined against this fixed order.
template <typename Derived>
double seq_sum(const Eigen::MatrixBase<Derived>& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i);
  return s;
}

template <typename Derived>
bool is_distribution(const Eigen::MatrixBase<Derived>& v, double tol = 1e-9) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v(i);
    if (!(x >= 0.0) || x > 1.0) return false;
  }
  return std::abs(seq_sum(v) - 1.0) <= tol;
}

/// KL divergence sum_i p_i log(p_i/q_i), with 0 log 0 = 0. Assumes q > 0.
template <typename P, typename Q>
double kl_divergence(const Eigen::MatrixBase<P>& p, const Eigen::MatrixBase<Q>& q) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) d += p(i) * std::log(p(i) / q(i));
  }
  return d;
}

/// Numerically stable softmax.
template <typename Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& logits) {
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  const double s = seq_sum(e);
  return e / s;
}

/// Clip to [0, 1] coordinate-wise, then rescale to unit sum.
/// Returns false when everything clips to zero.
inline bool clip_to_simplex(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::min(1.0, std::max(0.0, v(i)));
  const double s = seq_sum(v);
  if (s <= 0.0) return false;
  v /= s;
  return true;
}

}  // namespace urc::simplex
