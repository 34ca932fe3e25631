// Command-line front end: dev-summary construction, prevalence estimation,
// global/local recalibration, classifier scoring, and the two synthetic
// comparison sweeps. All outputs are written atomically.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "urc/experiments.hpp"
#include "urc/io.hpp"
#include "urc/metrics.hpp"
#include "urc/partition.hpp"

namespace {

using nlohmann::json;

json estimate_to_json(const urc::PrevalenceEstimate& est) {
  json j;
  j["method"] = urc::to_string(est.method);
  std::vector<double> p(est.p.values().begin(), est.p.values().end());
  j["p"] = p;
  j["converged"] = est.converged;
  if (est.final_loss) j["final_loss"] = *est.final_loss;
  if (est.iterations_used) j["iterations_used"] = *est.iterations_used;
  if (est.condition_number) j["condition_number"] = *est.condition_number;
  return j;
}

struct OptimizerFlags {
  double kl_weight = 1.0;
  double continuity_weight = 0.0;
  int max_iterations = 5000;
  double tolerance = 1e-10;
  double step_init = 0.1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kl-weight", kl_weight, "Weight of the divergence-from-prior term");
    cmd->add_option("--continuity-weight", continuity_weight,
                    "Weight of the adjacent-difference penalty");
    cmd->add_option("--max-iterations", max_iterations, "Optimizer iteration cap");
    cmd->add_option("--tolerance", tolerance, "Stop when the loss decrease falls below this");
    cmd->add_option("--step-init", step_init, "Initial line-search step");
  }

  urc::MapConfig to_config(const urc::ProbabilityVector& prior) const {
    urc::MapConfig cfg;
    cfg.loss.kl_weight = kl_weight;
    cfg.loss.continuity_weight = continuity_weight;
    cfg.loss.prior = prior;
    cfg.max_iterations = max_iterations;
    cfg.tolerance = tolerance;
    cfg.step_init = step_init;
    return cfg;
  }
};

int run_summary(const std::string& dev_path, std::size_t cells, double smoothing,
                const std::string& out_path) {
  const auto csv = urc::read_prediction_csv(dev_path);
  const auto dev = urc::to_labeled(csv);
  const auto summary = urc::build_dev_summary(dev, cells, smoothing);
  urc::atomic_write_file(out_path, urc::dev_summary_to_json(summary));
  return 0;
}

int run_estimate(const std::string& summary_path, const std::string& field_path,
                 const std::string& method, const OptimizerFlags& flags,
                 const std::string& out_path) {
  const auto summary = urc::dev_summary_from_json(urc::read_file(summary_path));
  const auto field = urc::read_prediction_csv(field_path).predictions;

  urc::PrevalenceEstimate est;
  if (method == "naive") {
    est = urc::naive_estimate(field);
  } else if (method == "linear") {
    const auto hist = urc::histogram(summary.partition, field);
    est = urc::linear_solve_estimate(summary.m_a, urc::observed_cell_frequencies(hist));
  } else {
    const auto hist = urc::histogram(summary.partition, field);
    est = urc::map_estimate(hist, summary.m_a, flags.to_config(summary.dev_prior));
  }
  urc::atomic_write_file(out_path, estimate_to_json(est).dump(2) + "\n");
  return 0;
}

int run_recalibrate(const std::string& summary_path, const std::string& field_path,
                    const std::string& out_path, bool per_group, std::size_t min_group_size,
                    const OptimizerFlags& flags, const std::string& estimates_path) {
  const auto summary = urc::dev_summary_from_json(urc::read_file(summary_path));
  const auto field = urc::read_prediction_csv(field_path).predictions;
  const auto cfg = flags.to_config(summary.dev_prior);

  if (!per_group) {
    const auto result = urc::global_urc(summary, field, cfg);
    urc::atomic_write_file(out_path, urc::predictions_to_csv(result.recalibrated));
    if (!estimates_path.empty()) {
      json j;
      j["estimate"] = estimate_to_json(result.estimate);
      urc::atomic_write_file(estimates_path, j.dump(2) + "\n");
    }
    return 0;
  }

  const auto outcomes = urc::local_urc(summary, field, cfg, min_group_size);
  urc::UnlabeledPredictionSet merged;
  json groups = json::array();
  std::size_t failed = 0;
  for (const auto& outcome : outcomes) {
    json g;
    g["group_id"] = outcome.group_id;
    g["ok"] = outcome.ok;
    if (outcome.ok) {
      g["estimate"] = estimate_to_json(outcome.result->estimate);
      for (const auto& row : outcome.result->recalibrated.rows) merged.rows.push_back(row);
    } else {
      g["error"] = outcome.error;
      ++failed;
    }
    groups.push_back(std::move(g));
  }
  if (failed == outcomes.size()) {
    std::cerr << "error: EmptySample: every group failed\n";
    return 3;
  }
  urc::atomic_write_file(out_path, urc::predictions_to_csv(merged));
  if (!estimates_path.empty()) {
    json j;
    j["groups"] = std::move(groups);
    urc::atomic_write_file(estimates_path, j.dump(2) + "\n");
  }
  return 0;
}

int run_metrics(const std::string& pred_path, int bins, const std::string& out_path,
                const std::string& table_path) {
  const auto csv = urc::read_prediction_csv(pred_path);
  const auto labeled = urc::to_labeled(csv);
  std::vector<urc::ProbabilityVector> preds;
  std::vector<std::size_t> labels;
  preds.reserve(labeled.rows.size());
  for (const auto& row : labeled.rows) {
    preds.push_back(row.prediction);
    labels.push_back(row.label);
  }

  json j;
  const auto nll = urc::nll_per_sample(preds, labels);
  j["nll_per_sample"] = nll.value;
  j["nll_hit_zero"] = nll.hit_zero;
  const auto hard = urc::accuracy_and_precision(preds, labels);
  j["accuracy"] = hard.accuracy;
  j["precision"] = hard.precision;
  j["precision_defined"] = hard.precision_defined;
  if (labeled.class_count() == 2) {
    const auto decomp = urc::brier_decomposition(preds, labels, bins);
    j["brier"] = decomp.brier;
    j["brier_calibration"] = decomp.calibration;
    j["brier_refinement"] = decomp.refinement;
    j["bins"] = decomp.bins;
  } else {
    j["brier_multiclass"] = urc::multiclass_brier_score(preds, labels);
  }

  if (!table_path.empty() && labeled.class_count() == 2) {
    const auto table = urc::reliability_table(preds, labels, bins);
    std::string csv_out = "bin,count,mean_prediction,event_rate\n";
    for (std::size_t k = 0; k < table.size(); ++k) {
      csv_out += std::to_string(k + 1);
      csv_out += ',' + std::to_string(table[k].count);
      csv_out += ',' + urc::format_double(table[k].mean_prediction);
      csv_out += ',' + urc::format_double(table[k].event_rate);
      csv_out += '\n';
    }
    urc::atomic_write_file(table_path, csv_out);
  }

  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    urc::atomic_write_file(out_path, text);
  }
  return 0;
}

int run_quantify(const std::string& experiment, std::uint64_t seed,
                 const std::vector<std::int64_t>& sizes, int replicas, std::int64_t train_size,
                 int threads, const std::string& out_path, const std::string& aggregate_path) {
  urc::ExperimentKind kind;
  if (experiment == "balanced_training") {
    kind = urc::ExperimentKind::balanced_training;
  } else if (experiment == "balanced_test") {
    kind = urc::ExperimentKind::balanced_test;
  } else {
    std::cerr << "error: InvalidConfig: unknown experiment '" << experiment << "'\n";
    return 2;
  }
  auto config = urc::ExperimentConfig::preset(kind, seed);
  if (!sizes.empty()) config.test_sizes = sizes;
  config.replicas = replicas;
  config.train_size = train_size;

  const auto rows = urc::run_quantification_experiment(config, threads);
  urc::atomic_write_file(out_path, urc::result_rows_to_csv(rows));
  if (!aggregate_path.empty()) {
    urc::atomic_write_file(aggregate_path, urc::aggregate_rows_to_csv(urc::aggregate_results(rows)));
  }
  return 0;
}

int run_local_sweep(const std::vector<double>& rates, std::int64_t n_per_group,
                    std::uint64_t seed, std::size_t cells, const std::string& out_path) {
  const auto rows = urc::run_local_experiment(rates, n_per_group, seed, cells);
  urc::atomic_write_file(out_path, urc::local_rows_to_csv(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prior-shift recalibration and quantification toolkit"};
  app.require_subcommand(1);

  // summary
  auto* summary_cmd = app.add_subcommand("summary", "Build a dev summary from a labeled CSV");
  std::string dev_path, summary_out;
  std::size_t cells = 4;
  double smoothing = 0.5;
  summary_cmd->add_option("--dev", dev_path, "Labeled prediction CSV")->required();
  summary_cmd->add_option("--cells", cells, "Partition cell count");
  summary_cmd->add_option("--smoothing", smoothing, "Additive smoothing");
  summary_cmd->add_option("--out", summary_out, "Output JSON path")->required();

  // estimate
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the field class distribution");
  std::string est_summary, est_field, est_out, est_method = "map";
  OptimizerFlags est_flags;
  estimate_cmd->add_option("--summary", est_summary, "Dev summary JSON")->required();
  estimate_cmd->add_option("--field", est_field, "Field prediction CSV")->required();
  estimate_cmd->add_option("--method", est_method, "map | linear | naive")
      ->check(CLI::IsMember({"map", "linear", "naive"}));
  est_flags.attach(estimate_cmd);
  estimate_cmd->add_option("--out", est_out, "Output JSON path")->required();

  // recalibrate
  auto* recal_cmd = app.add_subcommand("recalibrate", "Recalibrate field predictions");
  std::string rec_summary, rec_field, rec_out, rec_estimates;
  bool rec_groups = false;
  std::size_t min_group_size = 1;
  OptimizerFlags rec_flags;
  recal_cmd->add_option("--summary", rec_summary, "Dev summary JSON")->required();
  recal_cmd->add_option("--field", rec_field, "Field prediction CSV")->required();
  recal_cmd->add_flag("--groups", rec_groups, "Recalibrate each group column value separately");
  recal_cmd->add_option("--min-group-size", min_group_size,
                        "Groups below this size keep the dev prior");
  rec_flags.attach(recal_cmd);
  recal_cmd->add_option("--out", rec_out, "Recalibrated CSV path")->required();
  recal_cmd->add_option("--estimates", rec_estimates, "Estimate JSON sidecar path");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Score a labeled prediction CSV");
  std::string met_pred, met_out, met_table;
  int met_bins = 10;
  metrics_cmd->add_option("--pred", met_pred, "Labeled prediction CSV")->required();
  metrics_cmd->add_option("--bins", met_bins, "Reliability bins");
  metrics_cmd->add_option("--out", met_out, "Output JSON path (stdout when omitted)");
  metrics_cmd->add_option("--table", met_table, "Reliability table CSV path");

  // quantify-compare
  auto* quant_cmd = app.add_subcommand("quantify-compare", "Quantifier comparison sweep");
  std::string q_experiment, q_out, q_aggregate;
  std::uint64_t q_seed = 0;
  std::vector<std::int64_t> q_sizes;
  int q_replicas = 30, q_threads = 1;
  std::int64_t q_train_size = 2000;
  quant_cmd->add_option("--experiment", q_experiment, "balanced_training | balanced_test")
      ->required()
      ->check(CLI::IsMember({"balanced_training", "balanced_test"}));
  quant_cmd->add_option("--seed", q_seed, "Replica seed");
  quant_cmd->add_option("--sizes", q_sizes, "Test sizes")->delimiter(',');
  quant_cmd->add_option("--replicas", q_replicas, "Replica count");
  quant_cmd->add_option("--train-size", q_train_size, "Train/validation size");
  quant_cmd->add_option("--threads", q_threads, "Worker threads (does not change the rows)");
  quant_cmd->add_option("--out", q_out, "Result CSV path")->required();
  quant_cmd->add_option("--aggregate", q_aggregate, "Aggregate CSV path");

  // local-sweep
  auto* local_cmd = app.add_subcommand("local-sweep", "Complementary-rate group sweep");
  std::vector<double> l_rates;
  std::int64_t l_n = 3000;
  std::uint64_t l_seed = 0;
  std::size_t l_cells = 4;
  std::string l_out;
  local_cmd->add_option("--rates", l_rates, "Group-A base rates")->delimiter(',')->required();
  local_cmd->add_option("--n-per-group", l_n, "Samples per group");
  local_cmd->add_option("--seed", l_seed, "Seed");
  local_cmd->add_option("--cells", l_cells, "Partition cell count");
  local_cmd->add_option("--out", l_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: InvalidConfig: " << e.what() << "\n";
    return 2;
  }

  try {
    if (summary_cmd->parsed()) return run_summary(dev_path, cells, smoothing, summary_out);
    if (estimate_cmd->parsed()) {
      return run_estimate(est_summary, est_field, est_method, est_flags, est_out);
    }
    if (recal_cmd->parsed()) {
      return run_recalibrate(rec_summary, rec_field, rec_out, rec_groups, min_group_size,
                             rec_flags, rec_estimates);
    }
    if (metrics_cmd->parsed()) return run_metrics(met_pred, met_bins, met_out, met_table);
    if (quant_cmd->parsed()) {
      return run_quantify(q_experiment, q_seed, q_sizes, q_replicas, q_train_size, q_threads,
                          q_out, q_aggregate);
    }
    if (local_cmd->parsed()) return run_local_sweep(l_rates, l_n, l_seed, l_cells, l_out);
  } catch (const urc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return urc::is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
