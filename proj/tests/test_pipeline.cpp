#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "livediff/error.hpp"
#include "livediff/pipeline.hpp"
#include "livediff/synthetic.hpp"
#include "oracles.hpp"

using namespace livediff;
using namespace livediff::pipeline;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("livediff_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.lowd = 8;
  cfg.frame_width = 16;
  cfg.frame_height = 16;
  cfg.diffusion.iterations = 5;
  cfg.workers = 3;
  return cfg;
}

synthetic::Corpus small_corpus(const std::string& dir, std::uint64_t seed = 1) {
  synthetic::CorpusSpec spec;
  spec.live_clips = 14;
  spec.fake_clips = 14;
  spec.frames = 4;
  spec.width = 16;
  spec.height = 16;
  spec.deep_dim = 32;
  spec.deep_separation = 1.0;
  spec.train_fraction = 0.5;
  spec.devel_fraction = 0.25;
  spec.seed = seed;
  return synthetic::write_corpus(spec, dir);
}

}  // namespace

TEST_CASE("manifest parsing") {
  CHECK(kind_of([] { parse_manifest("", ".", false); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_manifest("# only a comment\n\n", ".", false); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_manifest("a\ttrain\tlive\tx.pgm\na\ttest\tfake\ty.pgm\n", ".", false); }) ==
        ErrorKind::DuplicateId);
  CHECK(kind_of([] { parse_manifest("a\ttrain\tlive\n", ".", false); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_manifest("a\tvalidation\tlive\tx.pgm\n", ".", false); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_manifest("a\ttrain\treal\tx.pgm\n", ".", false); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_manifest("a\ttrain\tlive\tnowhere.pgm\n", "/nonexistent", true); }) ==
        ErrorKind::MissingFile);

  try {
    parse_manifest("a\ttrain\tlive\tx.pgm\nb\ttrain\n", ".", false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  const auto m = parse_manifest(
      "c\ttrain\tlive\tc0.pgm,c1.pgm\n"
      "a\tdevel\tfake\t/abs/a.png\n"
      "b\ttest\tlive\tb.pgm\n",
      "/data", false);
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].source_id == "c");
  CHECK(m.entries[1].source_id == "a");
  CHECK(m.entries[2].source_id == "b");
  CHECK(m.entries[0].frame_paths == std::vector<std::string>{"/data/c0.pgm", "/data/c1.pgm"});
  CHECK(m.entries[1].frame_paths == std::vector<std::string>{"/abs/a.png"});
  CHECK(m.entries[1].split == Split::Devel);
  CHECK(m.entries[1].label == Label::Fake);
  CHECK(m.split(Split::Train).size() == 1);
}

TEST_CASE("config parsing") {
  const auto defaults = parse_config("");
  CHECK(defaults.diffusion.iterations == 15);
  CHECK(defaults.diffusion.lambda == 0.15);
  CHECK(defaults.diffusion.kappa == 15.0);
  CHECK(defaults.lowd == 32);
  CHECK(defaults.gmkl.rbf_gamma == 0.5);
  CHECK(defaults.gmkl.C == 1.0);

  const auto cfg = parse_config("# comment\niterations = 3\nconductance=rational\ndk_gamma=0.125\nC=4\n");
  CHECK(cfg.diffusion.iterations == 3);
  CHECK(cfg.diffusion.conductance == diffusion::ConductanceKind::Rational);
  CHECK(cfg.dk_gamma.kind == dk::GammaPolicyKind::Fixed);
  CHECK(cfg.gmkl.C == 4.0);
  CHECK(config_to_text(parse_config(config_to_text(cfg))) == config_to_text(cfg));
  CHECK(config_to_json(config_from_json(config_to_json(cfg))) == config_to_json(cfg));

  CHECK(kind_of([] { parse_config("colour=blue\n"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { parse_config("lambda\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("lambda=0.3\n"); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { parse_config("lowd=many\n"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("scores tsv round trip") {
  const std::vector<eval::ScoredSample> s{{"a", 0.1 + 0.2, Label::Live}, {"b", -1e-300, Label::Fake}};
  const auto back = scores_from_tsv(scores_to_tsv(s));
  REQUIRE(back.size() == 2);
  CHECK(back[0].score == s[0].score);
  CHECK(back[1].score == s[1].score);
  CHECK(back[1].label == Label::Fake);
  CHECK(kind_of([] { scores_from_tsv("a\t1.0\n"); }) == ErrorKind::ParseError);
}

TEST_CASE("parallel_for covers every index and reports the first failure") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 31) throw Error(ErrorKind::Io, "fail " + std::to_string(i));
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fail 7") != std::string::npos);
  }
}

TEST_CASE("run_eval") {
  const std::vector<eval::ScoredSample> devel{{"a", 1.0, Label::Live}, {"b", -1.0, Label::Fake}};
  const std::vector<eval::ScoredSample> test{{"c", 2.0, Label::Live}, {"d", -2.0, Label::Fake}};
  const auto r = run_eval(devel, test);
  CHECK(*r.devel.hter == 0.0);
  CHECK(*r.test.hter == 0.0);
  const std::vector<eval::ScoredSample> one{{"a", 1.0, Label::Live}};
  CHECK(kind_of([&] { run_eval(one, test); }) == ErrorKind::MissingClass);
}

TEST_CASE("train, predict and persist on a small synthetic corpus") {
  TempDir dir("pipeline_small");
  const auto corpus = small_corpus(dir.path.string());
  const auto manifest = load_manifest(corpus.manifest_path);
  const auto deep = read_feature_file(corpus.deep_path);
  const auto cfg = small_config();

  const auto art = run_train(manifest, cfg, deep);
  CHECK(art.model.c[0] + art.model.c[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(art.reducer.output_dim == 8);
  CHECK(art.dk_gamma > 0.0);

  SUBCASE("training accuracy is perfect and scoring reproduces training values") {
    const auto again = run_predict(manifest, Split::Train, art, deep);
    REQUIRE(again.size() == art.training_scores.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
      CHECK(again[i].source_id == art.training_scores[i].source_id);
      CHECK(std::abs(again[i].score - art.training_scores[i].score) <= 1e-10);
      CHECK((again[i].score > 0.0) == (again[i].label == Label::Live));
    }
  }

  SUBCASE("test scores match the composed stage oracles") {
    const auto scores = run_predict(manifest, Split::Test, art, deep);
    const auto index = index_deep_features(deep);
    const auto entries = manifest.split(Split::Test);
    REQUIRE(scores.size() == entries.size());
    const auto& m = art.model;
    const std::size_t lowd = art.reducer.output_dim, d = art.reducer.input_dim;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto clip = load_clip(*entries[e], cfg);
      std::vector<std::vector<double>> rows(lowd, std::vector<double>(clip.frames.size(), 0.0));
      for (std::size_t j = 0; j < clip.frames.size(); ++j) {
        const auto f = oracle::diffuse(clip.frames[j], cfg.diffusion.iterations, 0.15, 15.0, true);
        for (std::size_t k = 0; k < lowd; ++k)
          for (std::size_t i = 0; i < d; ++i)
            rows[k][j] += art.reducer.projection[k * d + i] * (f.pixels()[i] - art.reducer.mean[i]);
      }
      const auto dist = oracle::naive_sq_dists(rows);
      std::vector<double> x(lowd * lowd);
      for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = (std::exp(-art.dk_gamma * dist.v[k]) - m.prep.dk_mean[k]) * m.prep.dk_scale[k];
      auto y = index.at(entries[e]->source_id);
      double norm = 0.0;
      for (double v : y) norm += v * v;
      for (auto& v : y) v /= std::sqrt(norm);
      double f = m.b;
      for (std::size_t s = 0; s < m.alpha.size(); ++s) {
        double sq = 0.0, dot = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) sq += (x[k] - m.support_dk[s][k]) * (x[k] - m.support_dk[s][k]);
        for (std::size_t k = 0; k < y.size(); ++k) dot += y[k] * m.support_deep[s][k];
        f += m.alpha[s] * m.labels[s] * (m.c[0] * std::exp(-m.rbf_gamma * sq) + m.c[1] * dot);
      }
      CHECK(std::abs(scores[e].score - f) <= 1e-6);
    }
  }

  SUBCASE("artifacts survive a save/load cycle") {
    const auto out = dir / "model";
    save_artifacts(out, art);
    const auto back = load_artifacts(out);
    CHECK(artifacts_to_json(back) == artifacts_to_json(art));
    const auto a = run_predict(manifest, Split::Devel, art, deep);
    const auto b = run_predict(manifest, Split::Devel, back, deep);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].score == b[i].score);
  }

  SUBCASE("missing deep features are named") {
    auto partial = deep;
    const auto victim = manifest.split(Split::Train).back()->source_id;
    std::erase_if(partial.records, [&](const FeatureRecord& r) { return r.source_id == victim; });
    try {
      run_train(manifest, cfg, partial);
      FAIL("expected MissingDeepFeature");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingDeepFeature);
      CHECK(std::string(e.what()).find(victim) != std::string::npos);
    }
  }

  SUBCASE("an empty split scores to an empty list") {
    Manifest train_only;
    for (const auto* e : manifest.split(Split::Train)) train_only.entries.push_back(*e);
    CHECK(run_predict(train_only, Split::Test, art, deep).empty());
  }

  SUBCASE("train split with one label is rejected") {
    Manifest live_only;
    for (const auto& e : manifest.entries)
      if (e.label == Label::Live) live_only.entries.push_back(e);
    CHECK(kind_of([&] { run_train(live_only, cfg, deep); }) == ErrorKind::MissingClass);
  }
}

TEST_CASE("the D-K feature file carries one record per entry") {
  TempDir dir("pipeline_dk");
  const auto corpus = small_corpus(dir.path.string(), 5);
  const auto manifest = load_manifest(corpus.manifest_path);
  const auto cfg = small_config();
  const auto fitted = fit_train_reducer(manifest, cfg);
  const auto file = extract_dk_file(manifest, cfg, fitted.reducer, fitted.gamma);
  CHECK(file.kind == "dk");
  CHECK(file.dim == 64);
  REQUIRE(file.records.size() == manifest.entries.size());
  for (std::size_t i = 0; i < file.records.size(); ++i) CHECK(file.records[i].source_id == manifest.entries[i].source_id);
}

TEST_CASE("two identical runs write identical bytes") {
  TempDir dir("pipeline_det");
  const auto corpus = small_corpus(dir / "corpus", 3);
  const auto corpus2 = small_corpus(dir / "corpus2", 3);
  CHECK(slurp(corpus.deep_path) == slurp(corpus2.deep_path));
  const auto manifest = load_manifest(corpus.manifest_path);
  const auto deep = read_feature_file(corpus.deep_path);
  auto cfg = small_config();
  run_all(manifest, cfg, deep, dir / "a");
  cfg.workers = 1;
  run_all(manifest, cfg, deep, dir / "b");
  for (const char* f : {"model.json", "reducer.json", "scores_devel.tsv", "scores_test.tsv", "report.txt", "report.json"}) {
    const auto a = slurp(dir / (std::string("a/") + f));
    CHECK_MESSAGE(!a.empty(), f);
    CHECK_MESSAGE(a == slurp(dir / (std::string("b/") + f)), f);
  }
  const auto report = slurp(dir / "a/report.txt");
  CHECK(report.find("seed=") != std::string::npos);
}
