// livediff: diffuse | extract | train | predict | eval | all | synth

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "livediff/diffusion.hpp"
#include "livediff/error.hpp"
#include "livediff/feature_file.hpp"
#include "livediff/image.hpp"
#include "livediff/pipeline.hpp"
#include "livediff/synthetic.hpp"

namespace fs = std::filesystem;
using namespace livediff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

std::vector<std::string> frame_inputs(const std::string& in) {
  std::vector<std::string> out;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::directory_iterator(in)) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".pgm" || ext == ".png" || ext == ".PGM" || ext == ".PNG")) {
        out.push_back(e.path().string());
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  const auto ext = fs::path(in).extension().string();
  if (ext == ".pgm" || ext == ".png") return {in};
  std::ifstream list(in);
  if (!list) throw Error(ErrorKind::MissingFile, in);
  const auto base = fs::path(in).parent_path();
  for (std::string line; std::getline(list, line);) {
    if (line.empty() || line.front() == '#') continue;
    const fs::path p(line);
    out.push_back(p.is_absolute() ? p.string() : (base / p).string());
  }
  return out;
}

pipeline::PipelineConfig config_or_default(const std::string& path) {
  pipeline::PipelineConfig cfg;
  if (!path.empty()) cfg = pipeline::load_config(path);
  cfg.validate();
  return cfg;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic-diffusion kernel-matrix liveness pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::string deep_path;
  std::string model_dir;
  std::string out;

  // diffuse
  auto* diffuse = app.add_subcommand("diffuse", "Run anisotropic diffusion over frames");
  std::string diffuse_in;
  diffusion::DiffusionConfig dcfg;
  std::string conductance = "exp";
  diffuse->add_option("--in", diffuse_in, "Frame list file, directory, or single image")->required();
  diffuse->add_option("--out", out, "Output directory")->required();
  diffuse->add_option("--iters", dcfg.iterations, "Iterations L")->capture_default_str();
  diffuse->add_option("--lambda", dcfg.lambda, "Step weight in [0, 0.25]")->capture_default_str();
  diffuse->add_option("--kappa", dcfg.kappa, "Conductance scale K")->capture_default_str();
  diffuse->add_option("--conductance", conductance, "exp or rational")->capture_default_str();

  auto* extract = app.add_subcommand("extract", "Write D-K features for every manifest entry");
  extract->add_option("--manifest", manifest_path)->required();
  extract->add_option("--config", config_path);
  extract->add_option("--model", model_dir, "Trained model directory (reuses its reducer)");
  extract->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Fit reducer and GMKL classifier on the train split");
  train->add_option("--manifest", manifest_path)->required();
  train->add_option("--deep-features", deep_path)->required();
  train->add_option("--config", config_path);
  train->add_option("--out", out, "Model directory")->required();

  auto* predict = app.add_subcommand("predict", "Score one manifest split");
  std::string split_name = "test";
  predict->add_option("--manifest", manifest_path)->required();
  predict->add_option("--deep-features", deep_path)->required();
  predict->add_option("--model", model_dir)->required();
  predict->add_option("--split", split_name)->capture_default_str();
  predict->add_option("--out", out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("eval", "Select threshold on devel scores, report devel and test");
  std::string devel_scores;
  std::string test_scores;
  evaluate->add_option("--devel", devel_scores)->required();
  evaluate->add_option("--test", test_scores)->required();
  evaluate->add_option("--out", out, "Output directory");

  auto* all = app.add_subcommand("all", "train + predict devel/test + eval");
  all->add_option("--manifest", manifest_path)->required();
  all->add_option("--deep-features", deep_path)->required();
  all->add_option("--config", config_path);
  all->add_option("--out", out)->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic live/fake corpus");
  synthetic::CorpusSpec spec;
  synth->add_option("--out", out)->required();
  synth->add_option("--live", spec.live_clips)->capture_default_str();
  synth->add_option("--fake", spec.fake_clips)->capture_default_str();
  synth->add_option("--frames", spec.frames)->capture_default_str();
  synth->add_option("--width", spec.width)->capture_default_str();
  synth->add_option("--height", spec.height)->capture_default_str();
  synth->add_option("--deep-dim", spec.deep_dim)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*diffuse) {
      dcfg.conductance = diffusion::parse_conductance(conductance);
      dcfg.validate();
      const auto inputs = frame_inputs(diffuse_in);
      if (inputs.empty()) throw Error(ErrorKind::MissingFile, "no frames under " + diffuse_in);
      fs::create_directories(out);
      for (const auto& path : inputs) {
        const auto result = diffusion::diffuse(imaging::read_image(path), dcfg);
        imaging::write_pgm(join(out, fs::path(path).stem().string() + ".pgm"), result,
                           imaging::PgmDepth::Bits16);
      }
      write_file_atomic(join(out, "diffusion.txt"),
                        "iterations=" + std::to_string(dcfg.iterations) + "\n" +
                            "lambda=" + CLI::detail::to_string(dcfg.lambda) + "\n" +
                            "kappa=" + CLI::detail::to_string(dcfg.kappa) + "\n" +
                            "conductance=" + diffusion::to_string(dcfg.conductance) + "\n" +
                            "frames=" + std::to_string(inputs.size()) + "\n");
      std::cout << "diffused " << inputs.size() << " frame(s) into " << out << "\n";
      return kExitOk;
    }

    if (*extract) {
      const auto manifest = pipeline::load_manifest(manifest_path);
      pipeline::PipelineConfig cfg;
      dk::Reducer reducer;
      double gamma = 0.0;
      if (!model_dir.empty()) {
        auto art = pipeline::load_artifacts(model_dir);
        cfg = art.config;
        reducer = std::move(art.reducer);
        gamma = art.dk_gamma;
      } else {
        cfg = config_or_default(config_path);
        auto fitted = pipeline::fit_train_reducer(manifest, cfg);
        reducer = std::move(fitted.reducer);
        gamma = fitted.gamma;
        write_file_atomic(join(out, "reducer.json"), dk::reducer_to_json(reducer));
      }
      write_feature_file(join(out, "dk_features.ldfv"), pipeline::extract_dk_file(manifest, cfg, reducer, gamma));
      write_file_atomic(join(out, "extract.txt"), pipeline::config_to_text(cfg) +
                                                      "dk_gamma_value=" + CLI::detail::to_string(gamma) + "\n");
      std::cout << "wrote " << manifest.entries.size() << " D-K feature(s) to " << out << "\n";
      return kExitOk;
    }

    if (*train) {
      const auto manifest = pipeline::load_manifest(manifest_path);
      const auto cfg = config_or_default(config_path);
      const auto art = pipeline::run_train(manifest, cfg, read_feature_file(deep_path));
      pipeline::save_artifacts(out, art);
      write_file_atomic(join(out, "scores_train.tsv"), pipeline::scores_to_tsv(art.training_scores));
      std::cout << "c=(" << art.model.c[0] << ", " << art.model.c[1] << ") support="
                << art.model.support.size() << " converged=" << (art.model.converged ? "true" : "false")
                << "\n";
      return art.model.converged ? kExitOk : kExitNotConverged;
    }

    if (*predict) {
      const auto manifest = pipeline::load_manifest(manifest_path);
      const auto art = pipeline::load_artifacts(model_dir);
      const auto split = pipeline::parse_split(split_name);
      const auto scores = pipeline::run_predict(manifest, split, art, read_feature_file(deep_path));
      write_file_atomic(join(out, std::string("scores_") + pipeline::to_string(split) + ".tsv"),
                        pipeline::scores_to_tsv(scores));
      std::cout << "scored " << scores.size() << " " << pipeline::to_string(split) << " sample(s)\n";
      return art.model.converged ? kExitOk : kExitNotConverged;
    }

    if (*evaluate) {
      auto read_scores = [](const std::string& p) {
        const auto bytes = read_file_bytes(p);
        return pipeline::scores_from_tsv(std::string(bytes.begin(), bytes.end()));
      };
      const auto pair = pipeline::run_eval(read_scores(devel_scores), read_scores(test_scores));
      const auto text = eval::to_text(pair.devel, "devel.") + eval::to_text(pair.test, "test.");
      const auto json = nlohmann::json{{"devel", eval::to_json(pair.devel)}, {"test", eval::to_json(pair.test)}}.dump(2) + "\n";
      std::cout << text << json;
      if (!out.empty()) {
        write_file_atomic(join(out, "report.txt"), text);
        write_file_atomic(join(out, "report.json"), json);
      }
      return kExitOk;
    }

    if (*all) {
      const auto manifest = pipeline::load_manifest(manifest_path);
      const auto cfg = config_or_default(config_path);
      const auto summary = pipeline::run_all(manifest, cfg, read_feature_file(deep_path), out);
      std::cout << pipeline::eval_to_text(summary.reports, summary.converged, cfg.seed)
                << pipeline::eval_to_json(summary.reports, summary.converged, cfg.seed);
      return summary.converged ? kExitOk : kExitNotConverged;
    }

    if (*synth) {
      const auto corpus = synthetic::write_corpus(spec, out);
      std::cout << "manifest: " << corpus.manifest_path << "\ndeep features: " << corpus.deep_path << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}
