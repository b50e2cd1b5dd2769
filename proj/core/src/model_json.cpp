#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdlda/classifiers.hpp"
#include "hdlda/error.hpp"

namespace hdlda {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat mat_from_json(const json& doc, const char* field, Eigen::Index rows, Eigen::Index cols) {
  const json& arr = doc.at(field);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows) {
    throw Error(ErrorCode::ParseError, std::string("model field '") + field + "' has the wrong row count");
  }
  Mat out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = arr[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, std::string("model field '") + field + "' has the wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return out;
}

Vec vec_from_json(const json& doc, const char* field, Eigen::Index size) {
  const json& arr = doc.at(field);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != size) {
    throw Error(ErrorCode::ParseError, std::string("model field '") + field + "' has the wrong length");
  }
  Vec out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = arr[static_cast<std::size_t>(i)].get<double>();
  return out;
}

FitParams params_from_json(const json& doc) {
  FitParams p;
  if (!doc.contains("params")) return p;
  const json& j = doc.at("params");
  p.m1 = j.value("m1", p.m1);
  p.m2 = j.value("m2", p.m2);
  p.alpha = j.value("alpha", p.alpha);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.lambda = j.value("lambda", p.lambda);
  p.delta = j.value("delta", p.delta);
  return p;
}

}  // namespace

json model_to_json(const ClassifierModel& model) {
  json doc;
  doc["method"] = std::string(method_name(model.method));
  doc["k"] = model.k;
  doc["p"] = model.p;
  doc["params"] = params_to_json(model.method, model.params);
  std::visit(
      [&](const auto& payload) {
        using T = std::decay_t<decltype(payload)>;
        if constexpr (std::is_same_v<T, OptPayload>) {
          doc["means"] = mat_to_json(payload.truth->means());
          doc["sigma"] = mat_to_json(payload.truth->sigma());
        } else if constexpr (std::is_same_v<T, GldaPayload>) {
          doc["class_means"] = mat_to_json(payload.class_means);
          doc["omega"] = mat_to_json(payload.omega);
        } else if constexpr (std::is_same_v<T, SldaPayload>) {
          doc["centers"] = mat_to_json(payload.centers);
          doc["omega"] = mat_to_json(payload.omega);
          doc["epsilon"] = payload.epsilon;
        } else if constexpr (std::is_same_v<T, LpdPayload>) {
          doc["betas_to_1"] = mat_to_json(payload.betas_to_1);
          doc["class_means"] = mat_to_json(payload.class_means);
        } else {
          doc["shrunken_centroids"] = mat_to_json(payload.shrunken_centroids);
          doc["overall_centroid"] = vec_to_json(payload.overall_centroid);
          doc["feature_sd"] = vec_to_json(payload.feature_sd);
          doc["s0"] = payload.s0;
          doc["priors"] = vec_to_json(payload.priors);
          doc["delta"] = payload.delta;
        }
      },
      model.payload);
  return doc;
}

ClassifierModel model_from_json(const json& doc) {
  try {
    ClassifierModel model;
    model.method = parse_method(doc.at("method").get<std::string>());
    model.k = doc.at("k").get<int>();
    model.p = doc.at("p").get<int>();
    if (model.k < 2 || model.p < 1) throw Error(ErrorCode::ParseError, "model has invalid k or p");
    model.params = params_from_json(doc);
    const Eigen::Index k = model.k;
    const Eigen::Index p = model.p;
    switch (model.method) {
      case Method::Opt:
        model.payload = OptPayload{std::make_shared<const PopulationModel>(
            mat_from_json(doc, "means", k, p), mat_from_json(doc, "sigma", p, p))};
        break;
      case Method::Glda:
        model.payload = GldaPayload{mat_from_json(doc, "class_means", k, p), mat_from_json(doc, "omega", p, p)};
        break;
      case Method::Slda1:
      case Method::Slda2:
        model.payload = SldaPayload{mat_from_json(doc, "centers", k, p), mat_from_json(doc, "omega", p, p),
                                    doc.value("epsilon", 0.0)};
        break;
      case Method::Lpd:
        model.payload = LpdPayload{mat_from_json(doc, "betas_to_1", k, p), mat_from_json(doc, "class_means", k, p)};
        break;
      case Method::Nsc: {
        NscPayload nsc;
        nsc.shrunken_centroids = mat_from_json(doc, "shrunken_centroids", k, p);
        nsc.overall_centroid = vec_from_json(doc, "overall_centroid", p);
        nsc.feature_sd = vec_from_json(doc, "feature_sd", p);
        nsc.s0 = doc.at("s0").get<double>();
        nsc.priors = vec_from_json(doc, "priors", k);
        nsc.delta = doc.at("delta").get<double>();
        model.payload = std::move(nsc);
        break;
      }
    }
    finalize(model);
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model JSON: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace hdlda
