#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdlda/error.hpp"
#include "hdlda/population.hpp"

namespace hdlda {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("population spec: missing field \"") + key + "\"");
  }
  return obj.at(key);
}

Mat matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a non-empty array of arrays");
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.front().size());
  Mat out(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw Error(ErrorCode::ParseError, std::string(what) + ": ragged rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + ": non-numeric entry");
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

}  // namespace

PopulationModel population_from_json(const json& spec) {
  const int k = require(spec, "k").get<int>();
  const int p = require(spec, "p").get<int>();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need K ≥ 2 classes");
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "need p >= 1");
  Mat means = matrix_from_json(require(spec, "means"), "means");
  if (means.rows() != k || means.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "means must be k rows of length p");
  }
  const json& cov = require(spec, "cov");
  const std::string kind = require(cov, "kind").get<std::string>();
  Mat sigma = Mat::Zero(p, p);
  if (kind == "identity") {
    sigma.setIdentity();
  } else if (kind == "compound") {
    const double rho = require(cov, "rho").get<double>();
    const double variance = cov.value("variance", 1.0);
    sigma.setConstant(rho * variance);
    sigma.diagonal().setConstant(variance);
  } else if (kind == "ar1") {
    const double rho = require(cov, "rho").get<double>();
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(i - j));
    }
  } else if (kind == "block") {
    const json& blocks = require(cov, "blocks");
    int start = 0;
    for (const json& b : blocks) {
      const int size = require(b, "size").get<int>();
      const double rho = require(b, "rho").get<double>();
      if (size < 1 || start + size > p) {
        throw Error(ErrorCode::DimensionMismatch, "block sizes must sum to p");
      }
      sigma.block(start, start, size, size).setConstant(rho);
      sigma.block(start, start, size, size).diagonal().setOnes();
      start += size;
    }
    if (start != p) throw Error(ErrorCode::DimensionMismatch, "block sizes must sum to p");
  } else if (kind == "dense") {
    sigma = matrix_from_json(require(cov, "matrix"), "cov.matrix");
    if (sigma.rows() != p || sigma.cols() != p) {
      throw Error(ErrorCode::DimensionMismatch, "cov.matrix must be p x p");
    }
  } else {
    throw Error(ErrorCode::ParseError, "unknown covariance kind \"" + kind + "\"");
  }
  return PopulationModel(std::move(means), std::move(sigma));
}

PopulationModel load_population(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open population spec " + path);
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("population spec: ") + e.what());
  }
  try {
    return population_from_json(spec);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("population spec: ") + e.what());
  }
}

json population_to_json(const PopulationModel& model) {
  json means = json::array();
  for (Eigen::Index i = 0; i < model.means().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < model.means().cols(); ++j) row.push_back(model.means()(i, j));
    means.push_back(std::move(row));
  }
  json matrix = json::array();
  for (Eigen::Index i = 0; i < model.sigma().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < model.sigma().cols(); ++j) row.push_back(model.sigma()(i, j));
    matrix.push_back(std::move(row));
  }
  return json{{"k", model.k()},
              {"p", model.p()},
              {"means", std::move(means)},
              {"cov", {{"kind", "dense"}, {"matrix", std::move(matrix)}}}};
}

}  // namespace hdlda
