#include "urc/types.hpp"

#include <algorithm>
#include <cmath>

#include "urc/simplex.hpp"

namespace urc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegeneratePartition: return "DegeneratePartition";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::MissingGroup: return "MissingGroup";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ZeroPriorCoordinate: return "ZeroPriorCoordinate";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InconsistentSpec: return "InconsistentSpec";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::DegeneratePartition:
    case ErrorCode::DegenerateGrid:
      return true;
    default:
      return false;
  }
}

namespace {

// Strict weak order on bit patterns; only used to pick a cycle representative.
bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

// Repeated rescaling until the sequential sum is exactly 1.0 or the division
// stops changing the vector. Rounding can also trap the iteration in a short
// cycle of last-ulp states; in that case the canonical cycle element (closest
// sum, then lexicographic) is returned. Every stopping state is reproduced
// when fed back in, which makes normalize exactly idempotent.
void renormalize_to_fixpoint(Vector& v) {
  std::vector<Vector> history;
  for (int pass = 0; pass < 64; ++pass) {
    const double s = simplex::seq_sum(v);
    if (s == 1.0) return;
    Vector next = v / s;
    if (next == v) return;
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (history[i] == next) {
        Vector best = next;
        double best_gap = std::abs(simplex::seq_sum(best) - 1.0);
        for (std::size_t k = i; k < history.size(); ++k) {
          const double gap = std::abs(simplex::seq_sum(history[k]) - 1.0);
          if (gap < best_gap || (gap == best_gap && lex_less(history[k], best))) {
            best = history[k];
            best_gap = gap;
          }
        }
        const double gap_v = std::abs(simplex::seq_sum(v) - 1.0);
        if (gap_v < best_gap || (gap_v == best_gap && lex_less(v, best))) best = v;
        v = best;
        return;
      }
    }
    history.push_back(v);
    v = std::move(next);
  }
}

}  // namespace

ProbabilityVector::ProbabilityVector(Vector entries) {
  require(entries.size() >= 2, ErrorCode::BadLength,
          "probability vector needs at least 2 entries");
  for (Eigen::Index i = 0; i < entries.size(); ++i) {
    require(entries(i) >= 0.0, ErrorCode::NegativeEntry, "entry below zero");
    require(entries(i) <= 1.0 + 1e-6, ErrorCode::NotNormalized, "entry above one");
  }
  const double s = simplex::seq_sum(entries);
  require(std::abs(s - 1.0) <= 1e-6, ErrorCode::NotNormalized,
          "entries sum to " + std::to_string(s));
  renormalize_to_fixpoint(entries);
  values_ = std::move(entries);
}

ProbabilityVector::ProbabilityVector(std::initializer_list<double> entries)
    : ProbabilityVector(Eigen::Map<const Vector>(entries.begin(),
                                                 static_cast<Eigen::Index>(entries.size()))
                            .eval()) {}

ProbabilityVector ProbabilityVector::proportional_to(Vector raw) {
  require(raw.size() >= 2, ErrorCode::BadLength, "probability vector needs at least 2 entries");
  bool any_positive = false;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    require(raw(i) >= 0.0, ErrorCode::NegativeEntry, "entry below zero");
    if (raw(i) > 0.0) any_positive = true;
  }
  require(any_positive, ErrorCode::AllZero, "all entries are zero");
  renormalize_to_fixpoint(raw);
  return ProbabilityVector(std::move(raw), unchecked_t{});
}

ProbabilityVector normalize(const Vector& raw) { return ProbabilityVector::proportional_to(raw); }

std::size_t argmax_class(const ProbabilityVector& p) {
  require(p.size() >= 2, ErrorCode::BadLength, "argmax over unset probability vector");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p[i] > p[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

Partition::Partition(std::vector<double> cutpoints) : cutpoints_(std::move(cutpoints)) {
  for (std::size_t i = 0; i < cutpoints_.size(); ++i) {
    require(cutpoints_[i] > 0.0 && cutpoints_[i] < 1.0, ErrorCode::DegeneratePartition,
            "cutpoint outside (0, 1)");
    if (i > 0) {
      require(cutpoints_[i] > cutpoints_[i - 1], ErrorCode::DegeneratePartition,
              "cutpoints not strictly increasing");
    }
  }
}

std::size_t Partition::cell_of_score(double score) const {
  const auto it = std::lower_bound(cutpoints_.begin(), cutpoints_.end(), score);
  return static_cast<std::size_t>(it - cutpoints_.begin());
}

void ConfusionMatrix::validate() const {
  require(probs.rows() >= 2 && probs.cols() >= 1, ErrorCode::ShapeMismatch,
          "confusion matrix must be at least 2x1");
  require(class_counts.size() == static_cast<std::size_t>(probs.rows()), ErrorCode::ShapeMismatch,
          "class_counts length differs from row count");
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      require(probs(i, j) >= 0.0 && probs(i, j) <= 1.0, ErrorCode::NotNormalized,
              "confusion entry outside [0, 1]");
      s += probs(i, j);
    }
    require(std::abs(s - 1.0) <= 1e-9, ErrorCode::NotNormalized, "confusion row sum off unit");
  }
}

CellHistogram CellHistogram::from_counts(std::vector<std::int64_t> counts) {
  CellHistogram h;
  h.counts = std::move(counts);
  h.total = 0;
  for (const auto c : h.counts) {
    require(c >= 0, ErrorCode::CountMismatch, "negative cell count");
    h.total += c;
  }
  return h;
}

void CellHistogram::validate() const {
  std::int64_t s = 0;
  for (const auto c : counts) {
    require(c >= 0, ErrorCode::CountMismatch, "negative cell count");
    s += c;
  }
  require(s == total, ErrorCode::CountMismatch, "total differs from count sum");
}

namespace {

template <typename Rows>
void validate_rows(const Rows& rows, bool labeled) {
  if (rows.empty()) return;
  const Eigen::Index n = rows.front().prediction.size();
  require(n >= 2, ErrorCode::BadLength, "predictions need at least 2 classes");
  for (const auto& row : rows) {
    require(row.prediction.size() == n, ErrorCode::ShapeMismatch,
            "mixed prediction lengths in one set");
    if constexpr (requires { row.label; }) {
      if (labeled) {
        require(row.label < static_cast<std::size_t>(n), ErrorCode::BadLength,
                "label out of class range");
      }
    }
  }
}

}  // namespace

void LabeledPredictionSet::validate() const { validate_rows(rows, true); }
void UnlabeledPredictionSet::validate() const { validate_rows(rows, false); }

}  // namespace urc
