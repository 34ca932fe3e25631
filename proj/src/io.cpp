#include "urc/io.hpp"

#include <json.hpp>

#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace urc {

std::string format_double(double v) {
  char buf[64];
  for (const int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_double(const std::string& text) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  require(end == text.c_str() + text.size() && !text.empty() && errno == 0, ErrorCode::ParseError,
          "bad number: '" + text + "'");
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

PredictionCsv read_prediction_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "empty file " + path);
  const auto header = split_line(strip_cr(line));
  require(header.size() >= 4 && header[0] == "sample_id" && header[1] == "group_id",
          ErrorCode::ParseError, "expected header sample_id,group_id,c_1,...[,label]");

  PredictionCsv out;
  out.has_label_column = header.back() == "label";
  const std::size_t n = header.size() - 2 - (out.has_label_column ? 1 : 0);
  require(n >= 2, ErrorCode::ParseError, "need at least two class columns");
  for (std::size_t k = 0; k < n; ++k) {
    require(header[2 + k] == "c_" + std::to_string(k + 1), ErrorCode::ParseError,
            "expected column c_" + std::to_string(k + 1));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip_cr(line);
    if (stripped.empty()) continue;
    const auto fields = split_line(stripped);
    require(fields.size() == header.size(), ErrorCode::ParseError,
            path + ":" + std::to_string(line_no) + ": wrong field count");

    UnlabeledRow row;
    row.sample_id = fields[0];
    if (!fields[1].empty()) row.group_id = fields[1];
    Vector pred(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      pred(static_cast<Eigen::Index>(k)) = parse_double(fields[2 + k]);
    }
    row.prediction = ProbabilityVector(pred);
    out.predictions.rows.push_back(std::move(row));

    if (out.has_label_column && !fields.back().empty()) {
      const long label = std::strtol(fields.back().c_str(), nullptr, 10);
      require(label >= 1 && label <= static_cast<long>(n), ErrorCode::ParseError,
              path + ":" + std::to_string(line_no) + ": label out of range");
      out.labels.emplace_back(static_cast<std::size_t>(label - 1));
    } else {
      out.labels.emplace_back(std::nullopt);
    }
  }
  out.predictions.validate();
  return out;
}

LabeledPredictionSet to_labeled(const PredictionCsv& csv) {
  LabeledPredictionSet out;
  out.rows.reserve(csv.predictions.rows.size());
  for (std::size_t i = 0; i < csv.predictions.rows.size(); ++i) {
    require(csv.labels[i].has_value(), ErrorCode::ParseError,
            "row " + csv.predictions.rows[i].sample_id + " has no label");
    const auto& r = csv.predictions.rows[i];
    out.rows.push_back({r.sample_id, r.group_id, r.prediction, *csv.labels[i]});
  }
  out.validate();
  return out;
}

namespace {

std::string csv_header(Eigen::Index n, bool with_label) {
  std::string h = "sample_id,group_id";
  for (Eigen::Index k = 0; k < n; ++k) h += ",c_" + std::to_string(k + 1);
  if (with_label) h += ",label";
  h += "\n";
  return h;
}

template <typename Row>
void append_row_prefix(std::string& out, const Row& row) {
  out += row.sample_id;
  out += ',';
  if (row.group_id) out += *row.group_id;
  for (Eigen::Index k = 0; k < row.prediction.size(); ++k) {
    out += ',';
    out += format_double(row.prediction[k]);
  }
}

}  // namespace

std::string predictions_to_csv(const UnlabeledPredictionSet& set) {
  set.validate();
  std::string out = csv_header(set.class_count(), false);
  for (const auto& row : set.rows) {
    append_row_prefix(out, row);
    out += '\n';
  }
  return out;
}

std::string predictions_to_csv(const LabeledPredictionSet& set) {
  set.validate();
  std::string out = csv_header(set.class_count(), true);
  for (const auto& row : set.rows) {
    append_row_prefix(out, row);
    out += ',';
    out += std::to_string(row.label + 1);
    out += '\n';
  }
  return out;
}

std::string dev_summary_to_json(const DevSummary& summary) {
  summary.validate();
  nlohmann::json j;
  j["cutpoints"] = summary.partition.cutpoints();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < summary.m_a.probs.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < summary.m_a.probs.cols(); ++k) {
      row.push_back(summary.m_a.probs(i, k));
    }
    rows.push_back(std::move(row));
  }
  j["confusion"] = rows;
  j["class_counts"] = summary.m_a.class_counts;
  std::vector<double> prior(summary.dev_prior.values().begin(), summary.dev_prior.values().end());
  j["dev_prior"] = prior;
  j["smoothing"] = summary.smoothing;
  return j.dump(2) + "\n";
}

DevSummary dev_summary_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad summary json: ") + e.what());
  }
  try {
    const auto cutpoints = j.at("cutpoints").get<std::vector<double>>();
    const auto rows = j.at("confusion").get<std::vector<std::vector<double>>>();
    const auto class_counts = j.at("class_counts").get<std::vector<std::int64_t>>();
    const auto prior = j.at("dev_prior").get<std::vector<double>>();
    const double smoothing = j.at("smoothing").get<double>();

    require(!rows.empty(), ErrorCode::ParseError, "empty confusion matrix");
    ConfusionMatrix m;
    m.probs = Matrix(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == rows.front().size(), ErrorCode::ParseError,
              "ragged confusion matrix");
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        m.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
    m.class_counts = class_counts;

    DevSummary out{Partition(cutpoints), std::move(m),
                   ProbabilityVector(Eigen::Map<const Vector>(
                                         prior.data(), static_cast<Eigen::Index>(prior.size()))
                                         .eval()),
                   smoothing};
    out.validate();
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bad summary json: ") + e.what());
  }
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out;
  for (Eigen::Index f = 0; f < dataset.features.cols(); ++f) {
    out += "feature_" + std::to_string(f + 1) + ",";
  }
  out += "label\n";
  for (Eigen::Index s = 0; s < dataset.features.rows(); ++s) {
    for (Eigen::Index f = 0; f < dataset.features.cols(); ++f) {
      out += format_double(dataset.features(s, f));
      out += ',';
    }
    out += std::to_string(dataset.labels[static_cast<std::size_t>(s)] + 1);
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
  const fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    require(out.good(), ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorCode::IoError, "rename to " + path + " failed: " + ec.message());
  }
}

}  // namespace urc
