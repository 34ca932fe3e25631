#include "urc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "urc/io.hpp"
#include "urc/partition.hpp"

namespace urc {

namespace {

constexpr int kTrainEpochs = 800;
constexpr double kTrainLearningRate = 1.0;
constexpr double kSmoothing = 0.5;
constexpr std::size_t kComparisonCells = 2;  // median split of the validation scores

// The sweeps track the generator's positive class, so it is presented to the
// quantifiers as class 1 (first prediction entry, first class index).
ProbabilityVector positive_first(const ProbabilityVector& p) {
  Vector v(2);
  v << p[1], p[0];
  return ProbabilityVector(v);
}

std::size_t positive_first_label(std::size_t dataset_label) { return dataset_label == 1 ? 0 : 1; }

LabeledPredictionSet as_labeled_predictions(const Dataset& data, const LogisticModel& model,
                                            const std::string& id_prefix) {
  LabeledPredictionSet out;
  out.rows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.rows.push_back({id_prefix + std::to_string(i + 1), std::nullopt,
                        positive_first(predict(model, data.features.row(static_cast<Eigen::Index>(i))
                                                          .transpose())),
                        positive_first_label(data.labels[i])});
  }
  return out;
}

ProbabilityVector smoothed_label_prior(const LabeledPredictionSet& set, double smoothing) {
  Vector counts = Vector::Zero(set.class_count());
  for (const auto& row : set.rows) counts(static_cast<Eigen::Index>(row.label)) += 1.0;
  counts.array() += smoothing;
  return normalize(counts);
}

ResultRow make_row(const std::string& method, std::int64_t size, int replica, double truth,
                   const PrevalenceEstimate& est) {
  ResultRow row;
  row.method = method;
  row.test_size = size;
  row.replica = replica;
  row.estimated_prevalence_p1 = est.p[0];
  row.true_prevalence = truth;
  row.abs_error = std::abs(est.p[0] - truth);
  row.converged = est.converged;
  return row;
}

ResultRow failed_row(const std::string& method, std::int64_t size, int replica, double truth) {
  ResultRow row;
  row.method = method;
  row.test_size = size;
  row.replica = replica;
  row.estimated_prevalence_p1 = std::numeric_limits<double>::quiet_NaN();
  row.true_prevalence = truth;
  row.abs_error = std::numeric_limits<double>::quiet_NaN();
  row.converged = false;
  return row;
}

/// Splits one generated pool by final label into disjoint subsets with exact
/// per-split prevalences. Sampling splits out of a shared pool keeps the
/// class-conditional feature distributions identical across splits even with
/// label noise, which is the premise every quantifier here relies on.
std::vector<Dataset> split_pool_by_label(const Dataset& pool,
                                         const std::vector<std::pair<std::int64_t, std::int64_t>>&
                                             class_needs /* (negatives, positives) per split */) {
  std::vector<Dataset> splits(class_needs.size());
  std::vector<std::vector<Eigen::Index>> member(class_needs.size());
  auto remaining = class_needs;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t y = pool.labels[i];
    for (std::size_t s = 0; s < class_needs.size(); ++s) {
      auto& slot = y == 0 ? remaining[s].first : remaining[s].second;
      if (slot > 0) {
        --slot;
        member[s].push_back(static_cast<Eigen::Index>(i));
        break;
      }
    }
  }
  for (std::size_t s = 0; s < class_needs.size(); ++s) {
    require(remaining[s].first == 0 && remaining[s].second == 0, ErrorCode::InvalidConfig,
            "pool too small for the requested splits");
    splits[s].features = Matrix(static_cast<Eigen::Index>(member[s].size()), pool.features.cols());
    splits[s].labels.reserve(member[s].size());
    for (std::size_t r = 0; r < member[s].size(); ++r) {
      splits[s].features.row(static_cast<Eigen::Index>(r)) = pool.features.row(member[s][r]);
      splits[s].labels.push_back(pool.labels[static_cast<std::size_t>(member[s][r])]);
    }
  }
  return splits;
}

std::vector<ResultRow> run_replica(const ExperimentConfig& config, std::size_t size_idx,
                                   int replica) {
  const std::int64_t size = config.test_sizes[size_idx];
  const std::uint64_t base = (static_cast<std::uint64_t>(size_idx) * 1024 +
                              static_cast<std::uint64_t>(replica)) *
                             8;
  auto stream = [&](std::uint64_t k) { return RngStream(config.seed, base + k); };

  const auto pos_of = [](std::int64_t n, double prevalence) {
    return std::llround(prevalence * static_cast<double>(n));
  };
  const std::int64_t train_pos = pos_of(config.train_size, config.train_prevalence);
  const std::int64_t test_pos = pos_of(size, config.test_prevalence);
  const std::int64_t need_pos = 2 * train_pos + test_pos;
  const std::int64_t need_neg = 2 * (config.train_size - train_pos) + (size - test_pos);

  GeneratorConfig gen;
  gen.prevalence = 0.5;
  gen.n_samples = std::max<std::int64_t>(3 * std::max(need_pos, need_neg), 200);
  gen.rng = stream(0);
  const Dataset pool = generate(gen);

  const auto splits = split_pool_by_label(
      pool, {{config.train_size - train_pos, train_pos},
             {config.train_size - train_pos, train_pos},
             {size - test_pos, test_pos}});
  const Dataset& train = splits[0];
  const Dataset& validation = splits[1];
  const Dataset& test = splits[2];

  const LogisticModel model = train_logistic(train, kTrainEpochs, kTrainLearningRate, stream(3));

  const LabeledPredictionSet valid_preds = as_labeled_predictions(validation, model, "v");
  UnlabeledPredictionSet test_preds;
  test_preds.rows.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    test_preds.rows.push_back(
        {"t" + std::to_string(i + 1), std::nullopt,
         positive_first(predict(model, test.features.row(static_cast<Eigen::Index>(i)).transpose()))});
  }

  const double truth = config.test_prevalence;
  std::vector<ResultRow> rows;

  try {
    rows.push_back(make_row("cc", size, replica, truth, classify_and_count(test_preds)));
  } catch (const Error&) {
    rows.push_back(failed_row("cc", size, replica, truth));
  }

  try {
    const HardConfusion hard = estimate_hard_confusion(valid_preds, kSmoothing);
    rows.push_back(
        make_row("acc", size, replica, truth, adjusted_classify_and_count(test_preds, hard)));
  } catch (const Error&) {
    rows.push_back(failed_row("acc", size, replica, truth));
  }

  const ProbabilityVector dev_prior = smoothed_label_prior(valid_preds, kSmoothing);

  try {
    // Start at the exact training prevalence.
    const ProbabilityVector start{config.train_prevalence, 1.0 - config.train_prevalence};
    rows.push_back(make_row("em", size, replica, truth,
                            expectation_maximization(test_preds, dev_prior, start, EmConfig{})));
  } catch (const Error&) {
    rows.push_back(failed_row("em", size, replica, truth));
  }

  try {
    std::vector<double> scores;
    scores.reserve(valid_preds.rows.size());
    for (const auto& row : valid_preds.rows) scores.push_back(row.prediction[0]);
    const Partition partition = build_equal_mass_partition(scores, kComparisonCells);
    const ConfusionMatrix m_a = estimate_confusion_matrix(partition, valid_preds, kSmoothing);

    MapConfig map_cfg;
    map_cfg.loss.kl_weight = 1.0;
    map_cfg.loss.prior = dev_prior;
    rows.push_back(make_row("urc", size, replica, truth,
                            map_estimate(histogram(partition, test_preds), m_a, map_cfg)));
  } catch (const Error&) {
    rows.push_back(failed_row("urc", size, replica, truth));
  }

  return rows;
}

}  // namespace

ExperimentConfig ExperimentConfig::preset(ExperimentKind kind, std::uint64_t seed) {
  ExperimentConfig config;
  config.experiment = kind;
  config.seed = seed;
  if (kind == ExperimentKind::balanced_training) {
    config.train_prevalence = 0.5;
    config.test_prevalence = 0.05;
  } else {
    config.train_prevalence = 0.05;
    config.test_prevalence = 0.5;
  }
  return config;
}

void ExperimentConfig::validate() const {
  require(!test_sizes.empty(), ErrorCode::InvalidConfig, "no test sizes");
  for (const auto s : test_sizes) {
    require(s > 0, ErrorCode::InvalidConfig, "test sizes must be positive");
  }
  require(replicas >= 1, ErrorCode::InvalidConfig, "need at least one replica");
  require(train_size >= 4, ErrorCode::InvalidConfig, "training size too small");
  require(train_prevalence > 0.0 && train_prevalence < 1.0 && test_prevalence > 0.0 &&
              test_prevalence < 1.0,
          ErrorCode::InvalidConfig, "prevalences must be in (0, 1)");
}

std::vector<ResultRow> run_quantification_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  require(threads >= 1, ErrorCode::InvalidConfig, "thread count must be positive");

  struct Job {
    std::size_t size_idx;
    int replica;
  };
  std::vector<Job> jobs;
  for (std::size_t si = 0; si < config.test_sizes.size(); ++si) {
    for (int r = 1; r <= config.replicas; ++r) jobs.push_back({si, r});
  }

  // Each job writes into its own slot, so the row order is independent of
  // scheduling.
  std::vector<std::vector<ResultRow>> slots(jobs.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) break;
      slots[i] = run_replica(config, jobs[i].size_idx, jobs[i].replica);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRow> rows;
  rows.reserve(jobs.size() * 4);
  for (auto& slot : slots) {
    for (auto& row : slot) rows.push_back(std::move(row));
  }
  return rows;
}

std::string result_rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out =
      "method,test_size,replica,estimated_prevalence_p1,true_prevalence,abs_error,converged\n";
  for (const auto& r : rows) {
    out += r.method;
    out += ',' + std::to_string(r.test_size);
    out += ',' + std::to_string(r.replica);
    out += ',' + format_double(r.estimated_prevalence_p1);
    out += ',' + format_double(r.true_prevalence);
    out += ',' + format_double(r.abs_error);
    out += r.converged ? ",true\n" : ",false\n";
  }
  return out;
}

double median_ignoring_nan(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows) {
  const std::vector<std::string> methods = {"cc", "acc", "em", "urc"};
  std::vector<std::int64_t> sizes;
  for (const auto& r : rows) {
    if (std::find(sizes.begin(), sizes.end(), r.test_size) == sizes.end()) {
      sizes.push_back(r.test_size);
    }
  }
  std::sort(sizes.begin(), sizes.end());

  std::vector<AggregateRow> out;
  for (const auto size : sizes) {
    for (const auto& method : methods) {
      std::vector<double> estimates, errors;
      for (const auto& r : rows) {
        if (r.test_size == size && r.method == method) {
          estimates.push_back(r.estimated_prevalence_p1);
          errors.push_back(r.abs_error);
        }
      }
      if (estimates.empty()) continue;
      AggregateRow agg;
      agg.method = method;
      agg.test_size = size;
      agg.median_estimate = median_ignoring_nan(estimates);
      agg.median_abs_error = median_ignoring_nan(errors);
      errors.erase(std::remove_if(errors.begin(), errors.end(),
                                  [](double v) { return std::isnan(v); }),
                   errors.end());
      std::sort(errors.begin(), errors.end());
      agg.error_lo95 = quantile_sorted(errors, 0.025);
      agg.error_hi95 = quantile_sorted(errors, 0.975);
      out.push_back(std::move(agg));
    }
  }
  return out;
}

std::string aggregate_rows_to_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "method,test_size,median_estimate,median_abs_error,error_lo95,error_hi95\n";
  for (const auto& r : rows) {
    out += r.method;
    out += ',' + std::to_string(r.test_size);
    out += ',' + format_double(r.median_estimate);
    out += ',' + format_double(r.median_abs_error);
    out += ',' + format_double(r.error_lo95);
    out += ',' + format_double(r.error_hi95);
    out += '\n';
  }
  return out;
}

namespace {

struct ScoredGroup {
  UnlabeledPredictionSet predictions;
  std::vector<std::size_t> labels;
};

ScoredGroup make_group(const LogisticModel& model, const PlattParams& platt, double base_rate,
                       std::int64_t n, const std::string& group_id, RngStream rng) {
  GeneratorConfig gen;
  gen.n_samples = n;
  gen.prevalence = base_rate;
  gen.flip_y = 0.0;  // keep class-conditionals identical across base rates
  gen.rng = rng;
  const Dataset data = generate(gen);

  ScoredGroup out;
  out.predictions.rows.reserve(data.size());
  out.labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ProbabilityVector raw =
        positive_first(predict(model, data.features.row(static_cast<Eigen::Index>(i)).transpose()));
    const double calibrated = platt_apply(platt, raw[0]);
    Vector v(2);
    v << calibrated, 1.0 - calibrated;
    out.predictions.rows.push_back(
        {group_id + "-" + std::to_string(i + 1), group_id, ProbabilityVector(v)});
    out.labels.push_back(positive_first_label(data.labels[i]));
  }
  return out;
}

std::vector<ProbabilityVector> predictions_of(const UnlabeledPredictionSet& set) {
  std::vector<ProbabilityVector> out;
  out.reserve(set.rows.size());
  for (const auto& row : set.rows) out.push_back(row.prediction);
  return out;
}

}  // namespace

std::vector<LocalSweepRow> run_local_experiment(const std::vector<double>& base_rates,
                                                std::int64_t n_per_group, std::uint64_t seed,
                                                std::size_t cells) {
  require(!base_rates.empty(), ErrorCode::InvalidConfig, "no base rates");
  for (const double b : base_rates) {
    require(b > 0.0 && b < 1.0, ErrorCode::InvalidConfig, "base rates must be in (0, 1)");
  }
  require(n_per_group >= 2, ErrorCode::InvalidConfig, "groups too small");

  // One balanced classifier shared by the whole sweep, Platt-calibrated on a
  // held-out balanced split.
  GeneratorConfig gen;
  gen.n_samples = 2000;
  gen.prevalence = 0.5;
  gen.flip_y = 0.0;
  gen.rng = RngStream(seed, 0);
  const Dataset train = generate(gen);
  const LogisticModel model = train_logistic(train, kTrainEpochs, kTrainLearningRate,
                                             RngStream(seed, 1));

  gen.rng = RngStream(seed, 2);
  const Dataset calib = generate(gen);
  std::vector<double> calib_scores;
  std::vector<std::size_t> calib_labels;
  calib_scores.reserve(calib.size());
  for (std::size_t i = 0; i < calib.size(); ++i) {
    calib_scores.push_back(
        positive_first(predict(model, calib.features.row(static_cast<Eigen::Index>(i)).transpose()))[0]);
    calib_labels.push_back(positive_first_label(calib.labels[i]));
  }
  const PlattParams platt = platt_fit(calib_scores, calib_labels);

  gen.rng = RngStream(seed, 3);
  const Dataset dev = generate(gen);
  LabeledPredictionSet dev_preds;
  dev_preds.rows.reserve(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const ProbabilityVector raw =
        positive_first(predict(model, dev.features.row(static_cast<Eigen::Index>(i)).transpose()));
    const double calibrated = platt_apply(platt, raw[0]);
    Vector v(2);
    v << calibrated, 1.0 - calibrated;
    dev_preds.rows.push_back({"d" + std::to_string(i + 1), std::nullopt, ProbabilityVector(v),
                              positive_first_label(dev.labels[i])});
  }
  const DevSummary summary = build_dev_summary(dev_preds, cells, kSmoothing);

  std::vector<LocalSweepRow> out;
  for (std::size_t ri = 0; ri < base_rates.size(); ++ri) {
    const double rate = base_rates[ri];
    const ScoredGroup group_a = make_group(model, platt, rate, n_per_group, "A",
                                           RngStream(seed, 16 + 2 * ri));
    const ScoredGroup group_b = make_group(model, platt, 1.0 - rate, n_per_group, "B",
                                           RngStream(seed, 17 + 2 * ri));

    UnlabeledPredictionSet field;
    field.rows.reserve(group_a.predictions.rows.size() + group_b.predictions.rows.size());
    for (const auto& r : group_a.predictions.rows) field.rows.push_back(r);
    for (const auto& r : group_b.predictions.rows) field.rows.push_back(r);

    MapConfig map_cfg;
    map_cfg.loss.kl_weight = 1.0;
    const auto outcomes = local_urc(summary, field, map_cfg);
    require(outcomes.size() == 2, ErrorCode::InvalidConfig, "expected two groups");

    for (const auto& outcome : outcomes) {
      require(outcome.ok, ErrorCode::InvalidConfig,
              "group " + outcome.group_id + " failed: " + outcome.error);
      const auto& scored = outcome.group_id == "A" ? group_a : group_b;

      LocalSweepRow row;
      row.pair_rate = rate;
      row.group_id = outcome.group_id;
      row.group_base_rate = outcome.group_id == "A" ? rate : 1.0 - rate;
      row.group_size = n_per_group;
      row.estimated_p1 = outcome.result->estimate.p[0];
      row.converged = outcome.result->estimate.converged;

      const auto before = predictions_of(scored.predictions);
      const auto after = predictions_of(outcome.result->recalibrated);
      row.brier_before = brier_score(before, scored.labels);
      row.brier_after = brier_score(after, scored.labels);
      const auto decomp_before = brier_decomposition(before, scored.labels);
      const auto decomp_after = brier_decomposition(after, scored.labels);
      row.calibration_before = decomp_before.calibration;
      row.calibration_after = decomp_after.calibration;
      row.refinement_before = decomp_before.refinement;
      row.refinement_after = decomp_after.refinement;
      row.accuracy_before = accuracy_and_precision(before, scored.labels).accuracy;
      row.accuracy_after = accuracy_and_precision(after, scored.labels).accuracy;
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string local_rows_to_csv(const std::vector<LocalSweepRow>& rows) {
  std::string out =
      "pair_rate,group_id,group_base_rate,group_size,estimated_p1,converged,"
      "brier_before,brier_after,calibration_before,calibration_after,"
      "refinement_before,refinement_after,accuracy_before,accuracy_after\n";
  for (const auto& r : rows) {
    out += format_double(r.pair_rate);
    out += ',' + r.group_id;
    out += ',' + format_double(r.group_base_rate);
    out += ',' + std::to_string(r.group_size);
    out += ',' + format_double(r.estimated_p1);
    out += r.converged ? ",true" : ",false";
    out += ',' + format_double(r.brier_before);
    out += ',' + format_double(r.brier_after);
    out += ',' + format_double(r.calibration_before);
    out += ',' + format_double(r.calibration_after);
    out += ',' + format_double(r.refinement_before);
    out += ',' + format_double(r.refinement_after);
    out += ',' + format_double(r.accuracy_before);
    out += ',' + format_double(r.accuracy_after);
    out += '\n';
  }
  return out;
}

}  // namespace urc
