#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "livediff/diffusion.hpp"
#include "livediff/dkfeatures.hpp"
#include "livediff/eval.hpp"
#include "livediff/feature_file.hpp"
#include "livediff/gmkl.hpp"
#include "livediff/image.hpp"

namespace livediff::pipeline {

enum class Split { Train, Devel, Test };

const char* to_string(Split split) noexcept;
Split parse_split(const std::string& text);

struct ManifestEntry {
  std::string source_id;
  Split split = Split::Train;
  Label label = Label::Live;
  std::vector<std::string> frame_paths;  // resolved against the manifest directory
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(Split s) const;
};

/// One entry per line: source_id<TAB>split<TAB>label<TAB>path[,path...].
/// Blank lines and lines starting with '#' are skipped. Relative frame paths
/// resolve against the manifest's directory.
Manifest parse_manifest(const std::string& text, const std::string& base_dir,
                        bool check_files = true);
Manifest load_manifest(const std::string& path);

struct PipelineConfig {
  diffusion::DiffusionConfig diffusion;
  std::size_t lowd = 32;
  dk::GammaPolicy dk_gamma = dk::GammaPolicy::median();
  gmkl::GmklConfig gmkl;
  std::uint64_t seed = 0;
  std::size_t frame_width = 64;
  std::size_t frame_height = 64;
  std::size_t workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// key=value lines; unknown keys are rejected.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_to_text(const PipelineConfig& cfg);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& doc);

/// Reads every frame, resizing to the configured frame size when needed.
Clip load_clip(const ManifestEntry& entry, const PipelineConfig& cfg);

/// Everything needed to score new samples.
struct TrainedArtifacts {
  static constexpr int kVersion = 1;

  PipelineConfig config;
  dk::Reducer reducer;
  double dk_gamma = 0.0;
  gmkl::GmklModel model;
  std::vector<eval::ScoredSample> training_scores;
};

/// Deep features keyed by source id.
using DeepIndex = std::map<std::string, std::vector<double>>;

DeepIndex index_deep_features(const FeatureFile& file);

/// Throws MissingDeepFeature naming the first absent id.
const std::vector<double>& lookup_deep(const DeepIndex& index, const std::string& source_id);

/// Fits the reducer on diffused train clips, extracts D-K features, joins deep
/// features by id, and trains the fused classifier.
TrainedArtifacts run_train(const Manifest& manifest, const PipelineConfig& cfg,
                           const FeatureFile& deep);

/// Scores in manifest order.
std::vector<eval::ScoredSample> run_predict(const Manifest& manifest, Split split,
                                            const TrainedArtifacts& artifacts,
                                            const FeatureFile& deep);

struct EvalPair {
  eval::EvalReport devel;
  eval::EvalReport test;
};

/// Threshold selected on devel, applied unchanged to test.
EvalPair run_eval(const std::vector<eval::ScoredSample>& devel,
                  const std::vector<eval::ScoredSample>& test);

/// Diffused, reduced D-K features for every manifest entry.
FeatureFile extract_dk_file(const Manifest& manifest, const PipelineConfig& cfg,
                            const dk::Reducer& reducer, double gamma);

/// Fits a reducer and the D-K gamma on the train split.
struct FittedReducer {
  dk::Reducer reducer;
  double gamma = 0.0;
};
FittedReducer fit_train_reducer(const Manifest& manifest, const PipelineConfig& cfg);

// Persistence. Artifacts embed the config echo and seed; loaders verify versions.
std::string artifacts_to_json(const TrainedArtifacts& artifacts);
TrainedArtifacts artifacts_from_json(const std::string& text);
void save_artifacts(const std::string& dir, const TrainedArtifacts& artifacts);
TrainedArtifacts load_artifacts(const std::string& dir);

std::string scores_to_tsv(const std::vector<eval::ScoredSample>& scores);
std::vector<eval::ScoredSample> scores_from_tsv(const std::string& text);

std::string eval_to_text(const EvalPair& pair, bool converged, std::uint64_t seed);
std::string eval_to_json(const EvalPair& pair, bool converged, std::uint64_t seed);

struct RunSummary {
  EvalPair reports;
  bool converged = true;
};

/// train + predict(devel, test) + eval, writing model.json, reducer.json,
/// scores_devel.tsv, scores_test.tsv, report.txt and report.json into out_dir.
RunSummary run_all(const Manifest& manifest, const PipelineConfig& cfg, const FeatureFile& deep,
                   const std::string& out_dir);

/// Applies fn(i) for i in [0, n) across workers; results must go to slot i.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace livediff::pipeline
