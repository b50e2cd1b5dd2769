#pragma once

#include <string>
#include <vector>

#include "hdlda/population.hpp"

namespace hdlda::cli {

// A header row, an integer "class" column holding labels 1..K and numeric
// feature columns in file order.
struct DatasetCsv {
  std::vector<std::string> feature_names;
  LabeledSample sample;  // labels empty when the file has no class column
  bool has_labels = false;
};

/// Throws Error{IoError} or Error{ParseError}. With require_labels a missing
/// "class" column is an error; labels, when present, must be exactly {1..K}.
DatasetCsv read_dataset_csv(const std::string& path, bool require_labels);

/// Writes features as x1..xp unless names are given.
void write_dataset_csv(const std::string& path, const LabeledSample& sample,
                       const std::vector<std::string>& feature_names = {});

}  // namespace hdlda::cli
