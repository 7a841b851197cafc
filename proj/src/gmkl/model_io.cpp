#include "livediff/error.hpp"
#include "livediff/gmkl.hpp"

namespace livediff::gmkl {

nlohmann::json to_json(const GmklConfig& cfg) {
  return {{"C", cfg.C},
          {"rbf_gamma", cfg.rbf_gamma},
          {"max_outer", cfg.max_outer},
          {"max_smo_passes", cfg.max_smo_passes},
          {"tol_kkt", cfg.tol_kkt},
          {"tol_c", cfg.tol_c},
          {"c_step", cfg.c_step}};
}

GmklConfig config_from_json(const nlohmann::json& doc) {
  GmklConfig cfg;
  cfg.C = doc.at("C").get<double>();
  cfg.rbf_gamma = doc.at("rbf_gamma").get<double>();
  cfg.max_outer = doc.at("max_outer").get<std::size_t>();
  cfg.max_smo_passes = doc.at("max_smo_passes").get<std::size_t>();
  cfg.tol_kkt = doc.at("tol_kkt").get<double>();
  cfg.tol_c = doc.at("tol_c").get<double>();
  cfg.c_step = doc.at("c_step").get<double>();
  return cfg;
}

nlohmann::json to_json(const GmklModel& model) {
  nlohmann::json doc;
  doc["version"] = GmklModel::kVersion;
  doc["c"] = model.c;
  doc["b"] = model.b;
  doc["rbf_gamma"] = model.rbf_gamma;
  doc["kernels"] = {{"k1", "rbf"}, {"k2", "linear"}};
  doc["support_indices"] = model.support;
  doc["alpha"] = model.alpha;
  doc["labels"] = model.labels;
  doc["support_dk"] = model.support_dk;
  doc["support_deep"] = model.support_deep;
  doc["preprocessing"] = {{"dk_mean", model.prep.dk_mean},
                          {"dk_scale", model.prep.dk_scale},
                          {"deep", "l2"}};
  doc["dk_dim"] = model.dk_dim;
  doc["deep_dim"] = model.deep_dim;
  doc["training_size"] = model.training_size;
  doc["outer_iterations"] = model.outer_iterations;
  doc["converged"] = model.converged;
  doc["config"] = to_json(model.config);
  return doc;
}

GmklModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("version", -1) != GmklModel::kVersion) {
    throw Error(ErrorKind::VersionMismatch,
                "gmkl model version " + (doc.is_object() && doc.contains("version")
                                             ? doc["version"].dump()
                                             : std::string("missing")));
  }
  GmklModel m;
  try {
    m.c = doc.at("c").get<Weights>();
    m.b = doc.at("b").get<double>();
    m.rbf_gamma = doc.at("rbf_gamma").get<double>();
    m.support = doc.at("support_indices").get<std::vector<std::size_t>>();
    m.alpha = doc.at("alpha").get<std::vector<double>>();
    m.labels = doc.at("labels").get<std::vector<int>>();
    m.support_dk = doc.at("support_dk").get<std::vector<std::vector<double>>>();
    m.support_deep = doc.at("support_deep").get<std::vector<std::vector<double>>>();
    m.prep.dk_mean = doc.at("preprocessing").at("dk_mean").get<std::vector<double>>();
    m.prep.dk_scale = doc.at("preprocessing").at("dk_scale").get<std::vector<double>>();
    m.dk_dim = doc.at("dk_dim").get<std::size_t>();
    m.deep_dim = doc.at("deep_dim").get<std::size_t>();
    m.training_size = doc.at("training_size").get<std::size_t>();
    m.outer_iterations = doc.at("outer_iterations").get<std::size_t>();
    m.converged = doc.at("converged").get<bool>();
    m.config = config_from_json(doc.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedFile, std::string("gmkl model: ") + e.what());
  }
  const std::size_t s = m.support.size();
  if (m.alpha.size() != s || m.labels.size() != s || m.support_dk.size() != s ||
      m.support_deep.size() != s || m.prep.dk_mean.size() != m.dk_dim ||
      m.prep.dk_scale.size() != m.dk_dim) {
    throw Error(ErrorKind::MalformedFile, "gmkl model arrays are inconsistent");
  }
  for (std::size_t k = 0; k < s; ++k) {
    if (m.support_dk[k].size() != m.dk_dim || m.support_deep[k].size() != m.deep_dim) {
      throw Error(ErrorKind::MalformedFile, "support vector length mismatch");
    }
  }
  return m;
}

}  // namespace livediff::gmkl
