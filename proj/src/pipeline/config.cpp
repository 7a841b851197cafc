#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "livediff/error.hpp"
#include "livediff/pipeline.hpp"

namespace livediff::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidConfig, key + ": '" + v + "' is not a number");
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() != '-') {
      const auto u = std::stoull(v, &used);
      if (used == v.size()) return u;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidConfig, key + ": '" + v + "' is not a non-negative integer");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  diffusion.validate();
  gmkl.validate();
  if (lowd == 0) throw Error(ErrorKind::InvalidConfig, "lowd must be positive");
  if (frame_width < kMinStencilSide || frame_height < kMinStencilSide) {
    throw Error(ErrorKind::InvalidConfig, "frame size must be at least 3x3");
  }
  if (lowd > frame_width * frame_height) {
    throw Error(ErrorKind::InvalidConfig, "lowd exceeds the frame dimension");
  }
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"iterations", [&](auto& k, auto& v) { cfg.diffusion.iterations = to_uint(k, v); }},
      {"lambda", [&](auto& k, auto& v) { cfg.diffusion.lambda = to_double(k, v); }},
      {"kappa", [&](auto& k, auto& v) { cfg.diffusion.kappa = to_double(k, v); }},
      {"conductance", [&](auto&, auto& v) { cfg.diffusion.conductance = diffusion::parse_conductance(v); }},
      {"lowd", [&](auto& k, auto& v) { cfg.lowd = to_uint(k, v); }},
      {"dk_gamma", [&](auto&, auto& v) { cfg.dk_gamma = dk::parse_gamma_policy(v); }},
      {"C", [&](auto& k, auto& v) { cfg.gmkl.C = to_double(k, v); }},
      {"rbf_gamma", [&](auto& k, auto& v) { cfg.gmkl.rbf_gamma = to_double(k, v); }},
      {"max_outer", [&](auto& k, auto& v) { cfg.gmkl.max_outer = to_uint(k, v); }},
      {"max_smo_passes", [&](auto& k, auto& v) { cfg.gmkl.max_smo_passes = to_uint(k, v); }},
      {"tol_kkt", [&](auto& k, auto& v) { cfg.gmkl.tol_kkt = to_double(k, v); }},
      {"tol_c", [&](auto& k, auto& v) { cfg.gmkl.tol_c = to_double(k, v); }},
      {"c_step", [&](auto& k, auto& v) { cfg.gmkl.c_step = to_double(k, v); }},
      {"seed", [&](auto& k, auto& v) { cfg.seed = to_uint(k, v); }},
      {"frame_width", [&](auto& k, auto& v) { cfg.frame_width = to_uint(k, v); }},
      {"frame_height", [&](auto& k, auto& v) { cfg.frame_height = to_uint(k, v); }},
      {"workers", [&](auto& k, auto& v) { cfg.workers = to_uint(k, v); }},
  };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorKind::InvalidConfig, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "iterations=" << cfg.diffusion.iterations << "\n"
      << "lambda=" << num(cfg.diffusion.lambda) << "\n"
      << "kappa=" << num(cfg.diffusion.kappa) << "\n"
      << "conductance=" << diffusion::to_string(cfg.diffusion.conductance) << "\n"
      << "lowd=" << cfg.lowd << "\n"
      << "dk_gamma=" << dk::to_string(cfg.dk_gamma) << "\n"
      << "C=" << num(cfg.gmkl.C) << "\n"
      << "rbf_gamma=" << num(cfg.gmkl.rbf_gamma) << "\n"
      << "max_outer=" << cfg.gmkl.max_outer << "\n"
      << "max_smo_passes=" << cfg.gmkl.max_smo_passes << "\n"
      << "tol_kkt=" << num(cfg.gmkl.tol_kkt) << "\n"
      << "tol_c=" << num(cfg.gmkl.tol_c) << "\n"
      << "c_step=" << num(cfg.gmkl.c_step) << "\n"
      << "seed=" << cfg.seed << "\n"
      << "frame_width=" << cfg.frame_width << "\n"
      << "frame_height=" << cfg.frame_height << "\n";
  return out.str();
}

// `workers` only affects scheduling, so it is not part of the echo.
nlohmann::json config_to_json(const PipelineConfig& cfg) {
  return {{"diffusion",
           {{"iterations", cfg.diffusion.iterations},
            {"lambda", cfg.diffusion.lambda},
            {"kappa", cfg.diffusion.kappa},
            {"conductance", diffusion::to_string(cfg.diffusion.conductance)}}},
          {"lowd", cfg.lowd},
          {"dk_gamma", dk::to_string(cfg.dk_gamma)},
          {"gmkl", gmkl::to_json(cfg.gmkl)},
          {"seed", cfg.seed},
          {"frame_width", cfg.frame_width},
          {"frame_height", cfg.frame_height}};
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  PipelineConfig cfg;
  try {
    const auto& d = doc.at("diffusion");
    cfg.diffusion.iterations = d.at("iterations").get<std::size_t>();
    cfg.diffusion.lambda = d.at("lambda").get<double>();
    cfg.diffusion.kappa = d.at("kappa").get<double>();
    cfg.diffusion.conductance = diffusion::parse_conductance(d.at("conductance").get<std::string>());
    cfg.lowd = doc.at("lowd").get<std::size_t>();
    cfg.dk_gamma = dk::parse_gamma_policy(doc.at("dk_gamma").get<std::string>());
    cfg.gmkl = gmkl::config_from_json(doc.at("gmkl"));
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.frame_width = doc.at("frame_width").get<std::size_t>();
    cfg.frame_height = doc.at("frame_height").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedFile, std::string("config echo: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace livediff::pipeline
