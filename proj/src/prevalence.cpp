#include "urc/prevalence.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "urc/simplex.hpp"

namespace urc {

const char* to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::naive: return "naive";
    case EstimateMethod::linear: return "linear";
    case EstimateMethod::map: return "map";
    case EstimateMethod::cc: return "cc";
    case EstimateMethod::acc: return "acc";
    case EstimateMethod::em: return "em";
  }
  return "unknown";
}

PrevalenceEstimate naive_estimate(const UnlabeledPredictionSet& field) {
  require(!field.rows.empty(), ErrorCode::EmptySample, "empty field set");
  field.validate();
  Vector mean = Vector::Zero(field.class_count());
  for (const auto& row : field.rows) mean += row.prediction.values();
  mean /= static_cast<double>(field.rows.size());

  PrevalenceEstimate out;
  out.p = normalize(mean);
  out.method = EstimateMethod::naive;
  out.converged = true;
  return out;
}

namespace {

/// Shared by the linear estimator and ACC: least-squares solve of A p = b
/// with rank and conditioning diagnostics, then projection onto the simplex.
PrevalenceEstimate solve_and_project(const Matrix& a, const Vector& b, EstimateMethod method) {
  require(a.rows() >= a.cols(), ErrorCode::ShapeMismatch,
          "need at least as many equations as classes");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto rank = svd.rank();
  if (rank < a.cols()) {
    fail(ErrorCode::RankDeficient,
         "numerical rank " + std::to_string(rank) + " of " + std::to_string(a.cols()));
  }
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(a.cols() - 1);

  Vector raw = svd.solve(b);
  bool inside = std::abs(simplex::seq_sum(raw) - 1.0) <= 1e-9;
  for (Eigen::Index i = 0; i < raw.size() && inside; ++i) {
    inside = raw(i) >= -1e-9 && raw(i) <= 1.0 + 1e-9;
  }
  Vector clipped = raw;
  require(simplex::clip_to_simplex(clipped), ErrorCode::AllZero,
          "solution clipped to the zero vector");

  PrevalenceEstimate out;
  out.p = normalize(clipped);
  out.method = method;
  out.converged = inside;
  out.condition_number = cond;
  return out;
}

}  // namespace

PrevalenceEstimate linear_solve_estimate(const ConfusionMatrix& m_a, const CellFrequencies& v_a) {
  m_a.validate();
  v_a.validate();
  require(m_a.m_cells() >= m_a.n_classes(), ErrorCode::ShapeMismatch,
          "identifiability needs at least as many cells as classes");
  require(v_a.freqs.size() == m_a.m_cells(), ErrorCode::ShapeMismatch,
          "frequency length differs from cells");
  return solve_and_project(m_a.probs.transpose(), v_a.freqs, EstimateMethod::linear);
}

PrevalenceEstimate map_estimate(const CellHistogram& hist, const ConfusionMatrix& m_a,
                                const MapConfig& config) {
  m_a.validate();
  hist.validate();
  require(config.max_iterations >= 1 && config.tolerance > 0.0 && config.step_init > 0.0,
          ErrorCode::InvalidConfig, "bad optimizer configuration");
  const Eigen::Index n = m_a.probs.rows();
  const auto& prior = config.loss.prior;
  require(prior.size() == n, ErrorCode::ShapeMismatch, "prior length differs from classes");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(prior[i] > 0.0, ErrorCode::ZeroPriorCoordinate, "prior has a zero coordinate");
  }

  // Softmax parametrization: iterates stay strictly interior where both the
  // divergence and the gradient are finite. The gauge freedom (uniform logit
  // shifts) is fixed by keeping logits max-canonical; the update direction is
  // mean-centered, which removes the same direction from the step. Both
  // canonicalizations are exact under class permutation, so permuting classes
  // permutes every iterate bitwise.
  Vector logits = prior.values().array().log().matrix();
  logits.array() -= logits.maxCoeff();
  Vector p = simplex::softmax(logits);

  LossValue cur = detail::combined_loss_and_gradient_raw(hist, m_a, p, config.loss);

  bool converged = false;
  int iterations = 0;
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-18;
  // Bounding the per-iteration logit movement keeps a steep first gradient
  // from overshooting into the saturated region of the softmax, where
  // gradients vanish and descent would stall.
  constexpr double kMaxLogitStep = 1.0;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    iterations = iter;

    // Chain rule through softmax, then drop the gauge direction by centering.
    const double g_mean = cur.gradient.dot(p);
    Vector gz(n);
    for (Eigen::Index k = 0; k < n; ++k) gz(k) = p(k) * (cur.gradient(k) - g_mean);
    gz.array() -= simplex::seq_sum(gz) / static_cast<double>(n);
    const double gz2 = gz.squaredNorm();
    if (gz2 == 0.0) {
      converged = true;
      break;
    }

    double step = std::min(config.step_init, kMaxLogitStep / gz.cwiseAbs().maxCoeff());
    bool accepted = false;
    Vector z_try, p_try;
    LossValue next;
    while (step >= kMinStep) {
      z_try = logits - step * gz;
      z_try.array() -= z_try.maxCoeff();
      p_try = simplex::softmax(z_try);
      next = detail::combined_loss_and_gradient_raw(hist, m_a, p_try, config.loss);
      if (next.value <= cur.value - kArmijo * step * gz2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable descent direction left.
      converged = true;
      break;
    }
    const double decrease = cur.value - next.value;
    logits = z_try;
    p = p_try;
    cur = next;
    if (decrease < config.tolerance) {
      converged = true;
      break;
    }
  }

  PrevalenceEstimate out;
  out.p = normalize(p);
  out.method = EstimateMethod::map;
  out.final_loss = cur.value;
  out.iterations_used = iterations;
  out.converged = converged;
  return out;
}

}  // namespace urc
