#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urc/recalibrate.hpp"
#include "urc/synthdata.hpp"

namespace urc {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Prediction CSV: sample_id,group_id,c_1,...,c_n[,label]. Empty group_id
/// means ungrouped; labels are 1-based in the file. No quoting — ids must
/// not contain commas.
struct PredictionCsv {
  UnlabeledPredictionSet predictions;
  std::vector<std::optional<std::size_t>> labels;  // aligned with rows, 0-based
  bool has_label_column = false;
};

PredictionCsv read_prediction_csv(const std::string& path);

/// Requires every row to carry a label.
LabeledPredictionSet to_labeled(const PredictionCsv& csv);

std::string predictions_to_csv(const UnlabeledPredictionSet& set);
std::string predictions_to_csv(const LabeledPredictionSet& set);

std::string dev_summary_to_json(const DevSummary& summary);
DevSummary dev_summary_from_json(const std::string& json_text);

std::string dataset_to_csv(const Dataset& dataset);

std::string read_file(const std::string& path);

/// Writes through a temp file in the destination directory plus a rename, so
/// interrupted runs never leave a partial file at the target path.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace urc
