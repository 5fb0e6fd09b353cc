#include "l1kpca/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "l1kpca/error.hpp"
#include "l1kpca/version.hpp"

namespace l1kpca {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

// Splits one CSV record. Double quotes group a field; "" inside quotes is a
// literal quote.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(trim(field));
  return fields;
}

double parse_number(const std::string& cell, std::size_t line_no, std::size_t col_no) {
  std::string_view text = cell;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("non-numeric feature cell '" + cell + "'", line_no, col_no);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite feature cell '" + cell + "'", line_no, col_no);
  return value;
}

int parse_label(const std::string& cell, std::size_t line_no, std::size_t col_no) {
  const std::string v = lower(cell);
  if (v == "0" || v == "normal") return 0;
  if (v == "1" || v == "outlier") return 1;
  throw ParseError("unknown label value '" + cell + "' (expected 0/1 or normal/outlier)", line_no,
                   col_no);
}

json kernel_to_json(const KernelSpec& spec) {
  return {{"family", to_string(spec.family)},
          {"sigma", spec.sigma},
          {"degree", spec.degree},
          {"offset", spec.offset}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(j.at("family").get<std::string>());
  spec.sigma = j.at("sigma").get<double>();
  spec.degree = j.at("degree").get<int>();
  spec.offset = j.at("offset").get<double>();
  spec.validate();
  return spec;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

template <typename Vec>
json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json dataset_to_json(const Dataset& data) {
  json out = {{"values", matrix_to_json(data.values)},
              {"column_means", vector_to_json(data.column_means)},
              {"column_stds", vector_to_json(data.column_stds)}};
  if (data.labels) out["labels"] = *data.labels;
  return out;
}

std::shared_ptr<const Dataset> dataset_from_json(const json& j) {
  auto data = std::make_shared<Dataset>();
  data->values = matrix_from_json(j.at("values"));
  data->column_means = vector_from_json(j.at("column_means")).transpose();
  data->column_stds = vector_from_json(j.at("column_stds")).transpose();
  if (j.contains("labels")) data->labels = j.at("labels").get<std::vector<int>>();
  return data;
}

json header(const char* kind) {
  return {{"format", kModelFormat}, {"kind", kind}, {"tool_version", kVersion}};
}

json report_to_json(const ConvergenceReport& r) {
  return {{"iterations", r.iterations},
          {"norm_trace", r.norm_trace},
          {"terminated_by", std::string(to_string(r.terminated_by))},
          {"rate_estimates", r.rate_estimates},
          {"lagrange_multiplier", r.lagrange_multiplier},
          {"zero_band_hits", r.zero_band_hits}};
}

ConvergenceReport report_from_json(const json& j) {
  ConvergenceReport r;
  r.iterations = j.at("iterations").get<std::size_t>();
  r.norm_trace = j.at("norm_trace").get<std::vector<double>>();
  r.terminated_by = termination_from_string(j.at("terminated_by").get<std::string>());
  r.rate_estimates = j.at("rate_estimates").get<std::vector<double>>();
  r.lagrange_multiplier = j.at("lagrange_multiplier").get<double>();
  r.zero_band_hits = j.at("zero_band_hits").get<std::size_t>();
  return r;
}

KpcaModel l1_from_json(const json& j) {
  KpcaModel model;
  model.spec = kernel_from_json(j.at("kernel"));
  if (j.contains("train")) model.train = dataset_from_json(j.at("train"));
  for (const json& c : j.at("components")) {
    ComponentModel comp;
    comp.sign_vector = SignVector(c.at("sign_vector").get<std::vector<std::int8_t>>());
    comp.objective = c.at("objective").get<double>();
    comp.train_scores = vector_from_json(c.at("train_scores"));
    comp.report = report_from_json(c.at("report"));
    model.components.push_back(std::move(comp));
  }
  return model;
}

EigenModel l2_from_json(const json& j) {
  EigenModel model;
  model.spec = kernel_from_json(j.at("kernel"));
  if (j.contains("train")) model.train = dataset_from_json(j.at("train"));
  model.eigenvalues = vector_from_json(j.at("eigenvalues"));
  model.vectors = matrix_from_json(j.at("vectors"));
  return model;
}

DetectionModel detector_from_json(const json& j) {
  DetectionModel model;
  model.scores = matrix_from_json(j.at("scores"));
  model.variances = vector_from_json(j.at("variances"));
  model.alpha = j.at("alpha").get<double>();
  model.retained = j.at("retained").get<std::vector<std::size_t>>();
  if (!j.at("threshold").is_null()) model.threshold = j.at("threshold").get<double>();
  return model;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidData("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw InvalidData("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : InvalidData(line == 0 ? what
                            : what + " (line " + std::to_string(line) +
                                  (column == 0 ? "" : ", column " + std::to_string(column)) + ")"),
      line_(line),
      column_(column) {}

RawTable parse_csv(const std::string& text, const DatasetFile& file) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      lines.emplace_back(no, std::move(line));
    }
  }
  if (lines.empty()) throw ParseError("empty CSV input");

  RawTable table;
  std::size_t first = 0;
  std::size_t width = 0;
  if (file.has_header) {
    table.feature_names = split_record(lines[0].second, lines[0].first);
    width = table.feature_names.size();
    first = 1;
  } else {
    width = split_record(lines[0].second, lines[0].first).size();
  }

  std::optional<std::size_t> label_idx;
  if (file.label_column) {
    const std::string& key = *file.label_column;
    const bool numeric = !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char ch) {
      return std::isdigit(ch) != 0;
    });
    if (file.has_header) {
      const auto it = std::find(table.feature_names.begin(), table.feature_names.end(), key);
      if (it != table.feature_names.end()) {
        label_idx = static_cast<std::size_t>(it - table.feature_names.begin());
      }
    }
    if (!label_idx && numeric) label_idx = std::stoul(key);
    if (!label_idx || *label_idx >= width) {
      throw ParseError("label column '" + key + "' not found", file.has_header ? lines[0].first : 0);
    }
    if (file.has_header) table.feature_names.erase(table.feature_names.begin() + static_cast<std::ptrdiff_t>(*label_idx));
  }

  const std::size_t features = width - (label_idx ? 1 : 0);
  const std::size_t rows = lines.size() - first;
  if (rows == 0) throw ParseError("CSV has no data rows");
  if (features == 0) throw ParseError("CSV has no feature columns");
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(features));
  if (label_idx) table.labels.emplace(rows, 0);

  for (std::size_t r = 0; r < rows; ++r) {
    const auto& [line_no, line] = lines[first + r];
    const auto cells = split_record(line, line_no);
    if (cells.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    Eigen::Index out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_idx && c == *label_idx) {
        (*table.labels)[r] = parse_label(cells[c], line_no, c + 1);
      } else {
        table.values(static_cast<Eigen::Index>(r), out_col++) = parse_number(cells[c], line_no, c + 1);
      }
    }
  }
  return table;
}

RawTable read_csv_raw(const DatasetFile& file) {
  return parse_csv(read_text(file.path), file);
}

Dataset read_csv(const DatasetFile& file) {
  RawTable raw = read_csv_raw(file);
  Dataset data = standardize(raw.values);
  data.labels = std::move(raw.labels);
  return data;
}

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& header,
               const std::optional<std::vector<int>>& labels) {
  std::ostringstream out;
  out.precision(17);
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    if (labels) out << ",label";
    out << '\n';
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  write_text(path, out.str());
}

std::string serialize_model(const KpcaModel& model) {
  json j = header("l1");
  j["kernel"] = kernel_to_json(model.spec);
  if (model.train) j["train"] = dataset_to_json(*model.train);
  json comps = json::array();
  for (const auto& c : model.components) {
    std::vector<int> signs(c.sign_vector.entries().begin(), c.sign_vector.entries().end());
    comps.push_back({{"sign_vector", signs},
                     {"objective", c.objective},
                     {"train_scores", vector_to_json(c.train_scores)},
                     {"report", report_to_json(c.report)}});
  }
  j["components"] = std::move(comps);
  return j.dump();
}

std::string serialize_model(const EigenModel& model) {
  json j = header("l2");
  j["kernel"] = kernel_to_json(model.spec);
  if (model.train) j["train"] = dataset_to_json(*model.train);
  j["eigenvalues"] = vector_to_json(model.eigenvalues);
  j["vectors"] = matrix_to_json(model.vectors);
  return j.dump();
}

std::string serialize_model(const DetectionModel& model) {
  json j = header("detector");
  j["scores"] = matrix_to_json(model.scores);
  j["variances"] = vector_to_json(model.variances);
  j["alpha"] = model.alpha;
  j["retained"] = model.retained;
  j["threshold"] = model.threshold ? json(*model.threshold) : json(nullptr);
  return j.dump();
}

AnyModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format")) throw SchemaError("model file has no format field");
    const auto format = j.at("format").get<std::string>();
    if (format != kModelFormat) {
      throw SchemaError("unsupported model format '" + format + "' (expected " + kModelFormat + ")");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "l1") return l1_from_json(j);
    if (kind == "l2") return l2_from_json(j);
    if (kind == "detector") return detector_from_json(j);
    throw SchemaError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
}

void write_model(const KpcaModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}
void write_model(const EigenModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}
void write_model(const DetectionModel& model, const std::filesystem::path& path) {
  write_text(path, serialize_model(model));
}

AnyModel read_model(const std::filesystem::path& path) {
  return deserialize_model(read_text(path));
}

}  // namespace l1kpca
