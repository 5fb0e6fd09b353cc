#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "l1kpca/detect.hpp"
#include "l1kpca/kernel.hpp"
#include "l1kpca/l1.hpp"
#include "l1kpca/l2.hpp"

namespace l1kpca {

inline constexpr const char* kModelFormat = "l1kpca/1";

struct DatasetFile {
  std::filesystem::path path;
  bool has_header = true;
  // Column name (requires header) or zero-based index given as digits.
  std::optional<std::string> label_column;
};

struct RawTable {
  Eigen::MatrixXd values;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;  // empty without header
};

/// Parses a comma-separated numeric file. Labels may be 0/1 or
/// normal/outlier. Errors carry the 1-based line and column.
RawTable read_csv_raw(const DatasetFile& file);
RawTable parse_csv(const std::string& text, const DatasetFile& file);

/// read_csv_raw followed by standardize.
Dataset read_csv(const DatasetFile& file);

/// Writes values with 17 significant digits. A label column named "label"
/// is appended when labels are given.
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
               const std::vector<std::string>& header = {},
               const std::optional<std::vector<int>>& labels = std::nullopt);

using AnyModel = std::variant<KpcaModel, EigenModel, DetectionModel>;

std::string serialize_model(const KpcaModel& model);
std::string serialize_model(const EigenModel& model);
std::string serialize_model(const DetectionModel& model);

/// Parses a serialized model. L1 models come back without a kernel chain;
/// call rebuild_kernel_chain when the deflated Gram matrices are needed.
AnyModel deserialize_model(const std::string& text);

void write_model(const KpcaModel& model, const std::filesystem::path& path);
void write_model(const EigenModel& model, const std::filesystem::path& path);
void write_model(const DetectionModel& model, const std::filesystem::path& path);
AnyModel read_model(const std::filesystem::path& path);

}  // namespace l1kpca
