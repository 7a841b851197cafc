#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <thread>

#include "livediff/error.hpp"
#include "livediff/pipeline.hpp"

namespace livediff::pipeline {

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // Report the lowest failing index so errors are independent of scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Clip load_clip(const ManifestEntry& entry, const PipelineConfig& cfg) {
  Clip clip;
  clip.source_id = entry.source_id;
  clip.label = entry.label;
  clip.frames.reserve(entry.frame_paths.size());
  for (const auto& p : entry.frame_paths) {
    auto img = imaging::read_image(p);
    if (img.width() != cfg.frame_width || img.height() != cfg.frame_height) {
      img = imaging::resize(img, cfg.frame_width, cfg.frame_height);
    }
    clip.frames.push_back(std::move(img));
  }
  validate_clip(clip);
  return clip;
}

DeepIndex index_deep_features(const FeatureFile& file) {
  DeepIndex index;
  for (const auto& r : file.records) {
    if (!index.emplace(r.source_id, std::vector<double>(r.values.begin(), r.values.end())).second) {
      throw Error(ErrorKind::DuplicateId, "deep feature file repeats '" + r.source_id + "'");
    }
  }
  return index;
}

const std::vector<double>& lookup_deep(const DeepIndex& index, const std::string& source_id) {
  const auto it = index.find(source_id);
  if (it == index.end()) {
    throw Error(ErrorKind::MissingDeepFeature, "no deep feature for '" + source_id + "'");
  }
  return it->second;
}

namespace {

int label_sign(Label l) { return l == Label::Live ? 1 : -1; }

std::vector<dk::FeatureMatrix> diffused_matrices(const std::vector<const ManifestEntry*>& entries,
                                                 const PipelineConfig& cfg) {
  std::vector<dk::FeatureMatrix> out(entries.size());
  parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
    const auto clip = load_clip(*entries[i], cfg);
    out[i] = dk::clip_to_matrix(diffusion::diffuse_clip(clip, cfg.diffusion));
  });
  return out;
}

void require_both_labels(const std::vector<const ManifestEntry*>& entries, const char* what) {
  bool live = false;
  bool fake = false;
  for (const auto* e : entries) (e->label == Label::Live ? live : fake) = true;
  if (!live || !fake) {
    throw Error(ErrorKind::MissingClass, std::string(what) + " split needs both live and fake entries");
  }
}

FittedReducer fit_from_matrices(const std::vector<dk::FeatureMatrix>& matrices,
                                const PipelineConfig& cfg, std::vector<dk::FeatureMatrix>* reduced_out) {
  FittedReducer fitted;
  fitted.reducer = dk::fit_reducer(matrices, cfg.lowd);
  std::vector<dk::FeatureMatrix> reduced(matrices.size());
  parallel_for(matrices.size(), cfg.workers,
               [&](std::size_t i) { reduced[i] = dk::reduce(matrices[i], fitted.reducer); });
  fitted.gamma = cfg.dk_gamma.kind == dk::GammaPolicyKind::Fixed
                     ? cfg.dk_gamma.value
                     : dk::median_gamma(reduced, cfg.lowd);
  if (reduced_out != nullptr) *reduced_out = std::move(reduced);
  return fitted;
}

}  // namespace

FittedReducer fit_train_reducer(const Manifest& manifest, const PipelineConfig& cfg) {
  cfg.validate();
  const auto train = manifest.split(Split::Train);
  if (train.empty()) throw Error(ErrorKind::InsufficientSamples, "manifest has no train entries");
  return fit_from_matrices(diffused_matrices(train, cfg), cfg, nullptr);
}

TrainedArtifacts run_train(const Manifest& manifest, const PipelineConfig& cfg,
                           const FeatureFile& deep) {
  cfg.validate();
  const auto train = manifest.split(Split::Train);
  require_both_labels(train, "train");
  const auto index = index_deep_features(deep);
  for (const auto* e : train) lookup_deep(index, e->source_id);

  std::vector<dk::FeatureMatrix> reduced;
  auto fitted = fit_from_matrices(diffused_matrices(train, cfg), cfg, &reduced);

  gmkl::TrainingSet data;
  data.dk.resize(train.size());
  parallel_for(train.size(), cfg.workers, [&](std::size_t i) {
    data.dk[i] = dk::kernel_matrix(reduced[i], fitted.gamma).matrix;
  });
  for (const auto* e : train) {
    data.deep.push_back(lookup_deep(index, e->source_id));
    data.labels.push_back(label_sign(e->label));
  }

  TrainedArtifacts art;
  art.config = cfg;
  art.reducer = std::move(fitted.reducer);
  art.dk_gamma = fitted.gamma;
  art.model = gmkl::train(data, cfg.gmkl);
  art.training_scores.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    art.training_scores.push_back(
        {train[i]->source_id, gmkl::decision(art.model, data.dk[i], data.deep[i]), train[i]->label});
  }
  return art;
}

std::vector<eval::ScoredSample> run_predict(const Manifest& manifest, Split split,
                                            const TrainedArtifacts& art, const FeatureFile& deep) {
  const auto entries = manifest.split(split);
  const auto index = index_deep_features(deep);
  for (const auto* e : entries) lookup_deep(index, e->source_id);
  std::vector<eval::ScoredSample> out(entries.size());
  parallel_for(entries.size(), art.config.workers, [&](std::size_t i) {
    const auto clip = load_clip(*entries[i], art.config);
    const auto feature = dk::extract_dk(clip, art.config.diffusion, art.reducer, art.dk_gamma);
    const double score =
        gmkl::decision(art.model, feature.matrix, lookup_deep(index, entries[i]->source_id));
    out[i] = {entries[i]->source_id, score, entries[i]->label};
  });
  return out;
}

EvalPair run_eval(const std::vector<eval::ScoredSample>& devel,
                  const std::vector<eval::ScoredSample>& test) {
  const double t = eval::select_threshold(devel);
  return {eval::evaluate(devel, t), eval::evaluate(test, t)};
}

FeatureFile extract_dk_file(const Manifest& manifest, const PipelineConfig& cfg,
                            const dk::Reducer& reducer, double gamma) {
  FeatureFile file;
  file.kind = "dk";
  file.dim = reducer.output_dim * reducer.output_dim;
  file.records.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), cfg.workers, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    const auto f = dk::extract_dk(load_clip(e, cfg), cfg.diffusion, reducer, gamma);
    file.records[i] = {e.source_id, std::vector<float>(f.matrix.begin(), f.matrix.end())};
  });
  return file;
}

std::string artifacts_to_json(const TrainedArtifacts& art) {
  nlohmann::json doc;
  doc["format"] = "livediff-model";
  doc["version"] = TrainedArtifacts::kVersion;
  doc["seed"] = art.config.seed;
  doc["config"] = config_to_json(art.config);
  doc["dk_gamma"] = art.dk_gamma;
  doc["reducer_fingerprint"] = art.reducer.fingerprint;
  doc["gmkl"] = gmkl::to_json(art.model);
  return doc.dump() + "\n";
}

TrainedArtifacts artifacts_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedFile, std::string("model: ") + e.what());
  }
  if (doc.value("format", "") != "livediff-model") throw Error(ErrorKind::MalformedFile, "not a model document");
  if (doc.value("version", -1) != TrainedArtifacts::kVersion) {
    throw Error(ErrorKind::VersionMismatch, "model version " + doc["version"].dump());
  }
  TrainedArtifacts art;
  art.config = config_from_json(doc.at("config"));
  art.dk_gamma = doc.at("dk_gamma").get<double>();
  art.reducer.fingerprint = doc.at("reducer_fingerprint").get<std::string>();
  art.model = gmkl::model_from_json(doc.at("gmkl"));
  return art;
}

void save_artifacts(const std::string& dir, const TrainedArtifacts& art) {
  namespace fs = std::filesystem;
  write_file_atomic((fs::path(dir) / "reducer.json").string(), dk::reducer_to_json(art.reducer));
  write_file_atomic((fs::path(dir) / "model.json").string(), artifacts_to_json(art));
}

TrainedArtifacts load_artifacts(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto model_bytes = read_file_bytes((fs::path(dir) / "model.json").string());
  auto art = artifacts_from_json(std::string(model_bytes.begin(), model_bytes.end()));
  const auto reducer_bytes = read_file_bytes((fs::path(dir) / "reducer.json").string());
  const auto expected = art.reducer.fingerprint;
  art.reducer = dk::reducer_from_json(std::string(reducer_bytes.begin(), reducer_bytes.end()));
  if (art.reducer.fingerprint != expected) {
    throw Error(ErrorKind::VersionMismatch, "reducer fingerprint " + art.reducer.fingerprint +
                                                " does not match the model (" + expected + ")");
  }
  if (art.reducer.output_dim * art.reducer.output_dim != art.model.dk_dim) {
    throw Error(ErrorKind::DimensionMismatch, "reducer lowd does not match the model");
  }
  return art;
}

std::string scores_to_tsv(const std::vector<eval::ScoredSample>& scores) {
  std::string out = "# source_id\tlabel\tscore\n";
  char buf[40];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.score);
    out += s.source_id + "\t" + to_string(s.label) + "\t" + buf + "\n";
  }
  return out;
}

std::vector<eval::ScoredSample> scores_from_tsv(const std::string& text) {
  std::vector<eval::ScoredSample> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) {
      throw Error(ErrorKind::ParseError, "scores line " + std::to_string(line_no) + ": expected 3 fields");
    }
    eval::ScoredSample s;
    s.source_id = line.substr(0, a);
    s.label = parse_label(line.substr(a + 1, b - a - 1));
    try {
      s.score = std::stod(line.substr(b + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "scores line " + std::to_string(line_no) + ": bad score");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string eval_to_text(const EvalPair& pair, bool converged, std::uint64_t seed) {
  std::string out = "seed=" + std::to_string(seed) + "\n";
  out += std::string("converged=") + (converged ? "true" : "false") + "\n";
  out += eval::to_text(pair.devel, "devel.");
  out += eval::to_text(pair.test, "test.");
  return out;
}

std::string eval_to_json(const EvalPair& pair, bool converged, std::uint64_t seed) {
  nlohmann::json doc{{"seed", seed},
                     {"converged", converged},
                     {"devel", eval::to_json(pair.devel)},
                     {"test", eval::to_json(pair.test)}};
  return doc.dump(2) + "\n";
}

RunSummary run_all(const Manifest& manifest, const PipelineConfig& cfg, const FeatureFile& deep,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto art = run_train(manifest, cfg, deep);
  save_artifacts(out_dir, art);
  const auto devel = run_predict(manifest, Split::Devel, art, deep);
  const auto test = run_predict(manifest, Split::Test, art, deep);
  write_file_atomic((fs::path(out_dir) / "scores_train.tsv").string(), scores_to_tsv(art.training_scores));
  write_file_atomic((fs::path(out_dir) / "scores_devel.tsv").string(), scores_to_tsv(devel));
  write_file_atomic((fs::path(out_dir) / "scores_test.tsv").string(), scores_to_tsv(test));
  RunSummary summary{run_eval(devel, test), art.model.converged};
  write_file_atomic((fs::path(out_dir) / "report.txt").string(),
                    eval_to_text(summary.reports, summary.converged, cfg.seed));
  write_file_atomic((fs::path(out_dir) / "report.json").string(),
                    eval_to_json(summary.reports, summary.converged, cfg.seed));
  return summary;
}

}  // namespace livediff::pipeline
