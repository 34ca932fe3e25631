#include "urc/baselines.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "urc/recalibrate.hpp"
#include "urc/simplex.hpp"

namespace urc {

void HardConfusion::validate() const {
  require(probs.rows() == probs.cols() && probs.rows() >= 2, ErrorCode::ShapeMismatch,
          "hard confusion must be square");
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      require(probs(i, k) >= 0.0 && probs(i, k) <= 1.0, ErrorCode::NotNormalized,
              "entry outside [0, 1]");
      s += probs(i, k);
    }
    require(std::abs(s - 1.0) <= 1e-9, ErrorCode::NotNormalized, "row sum off unit");
  }
}

HardConfusion estimate_hard_confusion(const LabeledPredictionSet& validation, double smoothing) {
  require(!validation.rows.empty(), ErrorCode::EmptySample, "empty validation set");
  require(smoothing >= 0.0, ErrorCode::InvalidConfig, "smoothing must be non-negative");
  validation.validate();
  const Eigen::Index n = validation.class_count();

  Matrix counts = Matrix::Zero(n, n);
  std::vector<std::int64_t> per_class(static_cast<std::size_t>(n), 0);
  for (const auto& row : validation.rows) {
    const auto k = static_cast<Eigen::Index>(argmax_class(row.prediction));
    counts(static_cast<Eigen::Index>(row.label), k) += 1.0;
    ++per_class[row.label];
  }
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    require(per_class[i] > 0, ErrorCode::MissingClass,
            "class " + std::to_string(i + 1) + " absent from validation data");
  }

  HardConfusion out;
  out.probs = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom =
        static_cast<double>(per_class[static_cast<std::size_t>(i)]) + static_cast<double>(n) * smoothing;
    for (Eigen::Index k = 0; k < n; ++k) {
      out.probs(i, k) = (counts(i, k) + smoothing) / denom;
    }
  }
  out.validate();
  return out;
}

PrevalenceEstimate classify_and_count(const UnlabeledPredictionSet& field) {
  require(!field.rows.empty(), ErrorCode::EmptySample, "empty field set");
  field.validate();
  Vector counts = Vector::Zero(field.class_count());
  for (const auto& row : field.rows) {
    counts(static_cast<Eigen::Index>(argmax_class(row.prediction))) += 1.0;
  }
  PrevalenceEstimate out;
  out.p = normalize(counts);
  out.method = EstimateMethod::cc;
  out.converged = true;
  return out;
}

PrevalenceEstimate adjusted_classify_and_count(const UnlabeledPredictionSet& field,
                                               const HardConfusion& hard_conf) {
  hard_conf.validate();
  const PrevalenceEstimate cc = classify_and_count(field);
  require(cc.p.size() == hard_conf.n_classes(), ErrorCode::ShapeMismatch,
          "field class count differs from confusion size");

  const Matrix a = hard_conf.probs.transpose();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.rank() < a.cols()) {
    fail(ErrorCode::RankDeficient, "hard confusion is numerically singular (numerical rank " +
                                       std::to_string(svd.rank()) + ")");
  }
  const auto& sv = svd.singularValues();

  Vector raw = svd.solve(cc.p.values());
  bool inside = std::abs(simplex::seq_sum(raw) - 1.0) <= 1e-9;
  for (Eigen::Index i = 0; i < raw.size() && inside; ++i) {
    inside = raw(i) >= -1e-9 && raw(i) <= 1.0 + 1e-9;
  }
  require(simplex::clip_to_simplex(raw), ErrorCode::AllZero, "solution clipped to zero");

  PrevalenceEstimate out;
  out.p = normalize(raw);
  out.method = EstimateMethod::acc;
  out.converged = inside;
  out.condition_number = sv(0) / sv(a.cols() - 1);
  return out;
}

double em_marginal_log_likelihood(const UnlabeledPredictionSet& field,
                                  const ProbabilityVector& dev_prior,
                                  const ProbabilityVector& p) {
  require(!field.rows.empty(), ErrorCode::EmptySample, "empty field set");
  double ll = 0.0;
  for (const auto& row : field.rows) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      s += row.prediction[i] * p[i] / dev_prior[i];
    }
    ll += s > 0.0 ? std::log(s) : kLogMassFloor;
  }
  return ll;
}

PrevalenceEstimate expectation_maximization(const UnlabeledPredictionSet& field,
                                            const ProbabilityVector& dev_prior,
                                            const ProbabilityVector& start,
                                            const EmConfig& config,
                                            std::vector<double>* marginal_ll_trace) {
  require(!field.rows.empty(), ErrorCode::EmptySample, "empty field set");
  field.validate();
  require(config.max_iterations >= 1 && config.tolerance > 0.0, ErrorCode::InvalidConfig,
          "bad EM configuration");
  const Eigen::Index n = field.class_count();
  require(dev_prior.size() == n && start.size() == n, ErrorCode::ShapeMismatch,
          "prior/start length differs from class count");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(dev_prior[i] > 0.0, ErrorCode::ZeroPriorCoordinate,
            "dev prior has a zero coordinate");
  }

  ProbabilityVector p = start;
  if (marginal_ll_trace) marginal_ll_trace->push_back(em_marginal_log_likelihood(field, dev_prior, p));

  bool converged = false;
  int iterations = 0;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    iterations = iter;
    Vector mean = Vector::Zero(n);
    for (const auto& row : field.rows) {
      mean += recalibrate_prediction(row.prediction, dev_prior, p).values();
    }
    mean /= static_cast<double>(field.rows.size());
    const ProbabilityVector next = normalize(mean);

    if (marginal_ll_trace) {
      marginal_ll_trace->push_back(em_marginal_log_likelihood(field, dev_prior, next));
    }
    const double change = (next.values() - p.values()).cwiseAbs().maxCoeff();
    p = next;
    if (change < config.tolerance) {
      converged = true;
      break;
    }
  }

  PrevalenceEstimate out;
  out.p = p;
  out.method = EstimateMethod::em;
  out.final_loss = -em_marginal_log_likelihood(field, dev_prior, p);
  out.iterations_used = iterations;
  out.converged = converged;
  return out;
}

}  // namespace urc
