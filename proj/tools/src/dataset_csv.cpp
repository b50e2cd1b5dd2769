#include "dataset_csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hdlda/error.hpp"
#include "hdlda/simharness.hpp"

namespace hdlda::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return c != ' ' && c != '\t' && c != '\r'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void bad(const std::string& path, int line, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw Error(ErrorCode::ParseError, msg.str());
}

}  // namespace

DatasetCsv read_dataset_csv(const std::string& path, bool require_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) bad(path, 1, "empty file");
  const std::vector<std::string> header = split(line);

  DatasetCsv out;
  int class_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "class") {
      if (class_col >= 0) bad(path, 1, "duplicate class column");
      class_col = static_cast<int>(c);
    } else {
      out.feature_names.push_back(header[c]);
    }
  }
  if (class_col < 0 && require_labels) bad(path, 1, "missing \"class\" column");
  out.has_labels = class_col >= 0;
  const std::size_t p = out.feature_names.size();
  if (p == 0) bad(path, 1, "no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line);
    if (fields.size() != header.size()) {
      bad(path, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      if (f.empty()) bad(path, line_no, "missing value in column " + header[c]);
      const char* end = f.data() + f.size();
      if (static_cast<int>(c) == class_col) {
        int label = 0;
        const auto res = std::from_chars(f.data(), end, label);
        if (res.ec != std::errc{} || res.ptr != end) bad(path, line_no, "class label '" + f + "' is not an integer");
        labels.push_back(label);
      } else {
        double v = 0.0;
        const auto res = std::from_chars(f.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) bad(path, line_no, "cannot parse '" + f + "' as a number");
        values.push_back(v);
      }
    }
  }
  const std::size_t n = values.size() / p;
  if (n == 0) bad(path, line_no, "no data rows");

  out.sample.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      out.sample.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * p + c];
    }
  }
  if (out.has_labels) {
    const std::set<int> distinct(labels.begin(), labels.end());
    const int k = *distinct.rbegin();
    if (*distinct.begin() != 1 || static_cast<int>(distinct.size()) != k) {
      throw Error(ErrorCode::ParseError, path + ": class labels must form the contiguous set 1..K");
    }
    out.sample.labels = std::move(labels);
    out.sample.k = k;
  }
  return out;
}

void write_dataset_csv(const std::string& path, const LabeledSample& sample,
                       const std::vector<std::string>& feature_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  const bool labeled = !sample.labels.empty();
  if (labeled) out << "class";
  for (int c = 0; c < sample.p(); ++c) {
    if (labeled || c > 0) out << ',';
    out << (feature_names.empty() ? "x" + std::to_string(c + 1)
                                  : feature_names[static_cast<std::size_t>(c)]);
  }
  out << '\n';
  for (int r = 0; r < sample.n(); ++r) {
    if (labeled) out << sample.labels[static_cast<std::size_t>(r)];
    for (int c = 0; c < sample.p(); ++c) {
      if (labeled || c > 0) out << ',';
      out << format_double(sample.x(r, c));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace hdlda::cli
