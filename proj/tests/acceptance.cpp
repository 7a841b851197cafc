// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "livediff/diffusion.hpp"
#include "livediff/dkfeatures.hpp"
#include "livediff/eval.hpp"
#include "livediff/gmkl.hpp"
#include "livediff/pipeline.hpp"
#include "livediff/synthetic.hpp"
#include "oracles.hpp"

using namespace livediff;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Accumulates the first violation; `detail` ends up on the report line.
struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      detail = why;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome brightness() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::vector<GrayImage> images;
  for (int k = 0; k < 100; ++k) images.push_back(oracle::random_image(64, 64, rng));
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& img : images) {
    const auto out = diffusion::diffuse(img, diffusion::DiffusionConfig{});
    worst = std::max(worst, std::abs(out.sum() - img.sum()) / img.sum());
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-6, "relative drift " + fmt(worst));
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  if (o.ok) o.detail = "max drift " + fmt(worst) + ", " + fmt(elapsed) + " s";
  return o;
}

Outcome fixed_point() {
  Outcome o;
  std::mt19937_64 rng(102);
  for (double v : {0.0, 17.25, 255.0}) {
    GrayImage flat(23, 19, v);
    o.require(diffusion::diffuse(flat, diffusion::DiffusionConfig{}) == flat, "constant image moved");
  }
  diffusion::DiffusionConfig one, two;
  one.iterations = 1;
  two.iterations = 2;
  for (int k = 0; k < 20; ++k) {
    const auto img = oracle::random_image(31, 17, rng);
    const auto composed = diffusion::diffuse_step(diffusion::diffuse_step(img, one), one);
    o.require(diffusion::diffuse(img, two) == composed, "L=2 differs from two steps");
  }
  return o;
}

Outcome edge_enhancement() {
  Outcome o;
  // Smoothed step of height 100, width 3, plus a low ripple far from the edge.
  GrayImage img(64, 8);
  for (std::size_t j = 0; j < 64; ++j) {
    const double x = static_cast<double>(j) - 31.5;
    double v = 100.0 + 50.0 * std::tanh(x / 3.0);
    if (std::abs(x) > 18.0) v += 2.0 * std::sin(2.0 * M_PI * static_cast<double>(j) / 6.0);
    for (std::size_t i = 0; i < 8; ++i) img.at(i, j) = v;
  }
  auto steepest = [](const GrayImage& g, std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t j = from; j + 1 < to; ++j) m = std::max(m, std::abs(g.at(0, j + 1) - g.at(0, j)));
    return m;
  };
  const double knee = 15.0 / std::sqrt(2.0);
  o.require(steepest(img, 20, 44) > knee, "profile not steep enough");
  diffusion::DiffusionConfig step;
  step.iterations = 1;
  auto lib = img;
  auto ref = img;
  double edge = steepest(img, 0, 64);
  double ripple = std::max(steepest(img, 0, 12), steepest(img, 52, 64));
  for (int l = 1; l <= 5; ++l) {
    lib = diffusion::diffuse(lib, step);
    ref = oracle::diffuse_step(ref, 0.15, 15.0, true);
    for (std::size_t k = 0; k < lib.size(); ++k) {
      o.require(std::abs(lib.pixels()[k] - ref.pixels()[k]) <= 1e-9, "library departs from the reference stencil");
    }
    const double e = steepest(ref, 0, 64);
    const double r = std::max(steepest(ref, 0, 12), steepest(ref, 52, 64));
    o.require(e >= edge, "edge slope fell at iteration " + std::to_string(l));
    o.require(r < ripple, "ripple grew at iteration " + std::to_string(l));
    edge = e;
    ripple = r;
  }
  if (o.ok) o.detail = "edge slope " + fmt(edge) + ", ripple " + fmt(ripple) + " after 5 steps";
  return o;
}

Outcome flux_derivative() {
  Outcome o;
  double worst = 0.0;
  for (auto kind : {diffusion::ConductanceKind::Exponential, diffusion::ConductanceKind::Rational}) {
    for (int k = -900; k <= 900; ++k) {
      const double s = 45.0 * k / 900.0;
      const double h = 1e-6;
      const double fd = (diffusion::flux_diagnostic(s + h, 15.0, kind).phi -
                         diffusion::flux_diagnostic(s - h, 15.0, kind).phi) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - diffusion::flux_diagnostic(s, 15.0, kind).phi_prime));
    }
  }
  o.require(worst <= 1e-6, "max error " + fmt(worst));
  if (o.ok) o.detail = "max error " + fmt(worst);
  return o;
}

Outcome theorem_one() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> cols(2, 12);
  const std::size_t dims[] = {4, 8, 16, 32};
  double smallest = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t lowd = dims[trial % 4];
    const auto rows = oracle::random_rows(lowd, cols(rng), rng);
    dk::FeatureMatrix m(lowd, rows.front().size());
    for (std::size_t i = 0; i < lowd; ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    const auto dist = oracle::naive_sq_dists(rows);
    std::vector<double> off;
    for (std::size_t i = 0; i < lowd; ++i)
      for (std::size_t j = i + 1; j < lowd; ++j) off.push_back(dist(i, j));
    std::nth_element(off.begin(), off.begin() + off.size() / 2, off.end());
    const auto k = dk::kernel_matrix(m, 1.0 / off[off.size() / 2]);
    for (std::size_t i = 0; i < lowd; ++i) {
      o.require(k(i, i) == 1.0, "diagonal not exactly 1");
      for (std::size_t j = 0; j < lowd; ++j) o.require(std::abs(k(i, j) - k(j, i)) <= 1e-10, "asymmetric");
    }
    const double ev = oracle::min_eigenvalue(k.matrix, lowd);
    smallest = std::min(smallest, ev);
    o.require(ev > 0.0, "singular kernel matrix at trial " + std::to_string(trial));
  }
  if (o.ok) o.detail = "smallest eigenvalue " + fmt(smallest);
  return o;
}

Outcome gram_equivalence() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::uniform_int_distribution<std::size_t> size(2, 40);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = oracle::random_rows(size(rng), size(rng), rng, 1.0 + trial);
    dk::FeatureMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    const auto fast = dk::pairwise_sq_dists(m);
    const auto ref = oracle::naive_sq_dists(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      o.require(fast[i * rows.size() + i] == 0.0, "nonzero diagonal");
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (i != j) worst = std::max(worst, oracle::rel_diff(fast[i * rows.size() + j], ref(i, j)));
      }
    }
  }
  o.require(worst <= 1e-9, "max relative error " + fmt(worst));
  if (o.ok) o.detail = "max relative error " + fmt(worst);
  return o;
}

Outcome dual_oracle() {
  Outcome o;
  {
    gmkl::KernelMatrix k{2, {1.0, -1.0, -1.0, 1.0}};
    const std::vector<int> y{1, -1};
    gmkl::SmoOptions opt;
    opt.C = 10.0;
    const auto sol = gmkl::solve_dual(k, y, opt);
    o.require(sol.alpha[0] == 0.5 && sol.alpha[1] == 0.5 && sol.b == 0.0, "two-point case not exact");
  }
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> size(3, 12);
  std::bernoulli_distribution coin(0.5);
  const double cs[] = {0.5, 1.0, 5.0};
  double worst_obj = 0.0, worst_score = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    auto xs = oracle::random_rows(n, 3, rng);
    std::vector<int> y(n);
    for (auto& v : y) v = coin(rng) ? 1 : -1;
    y[0] = 1;
    y[1] = -1;
    for (std::size_t i = 0; i < n; ++i) xs[i][0] += 0.5 * y[i];
    const double c = cs[trial % 3];
    const auto k = gmkl::rbf_gram(xs, 0.5);
    oracle::Dense kd(n, n);
    kd.v = k.values;
    const auto sol = gmkl::solve_dual(k, y, {c, 1e-8, 100000, {}});
    const auto ref = oracle::brute_force_dual(kd, y, c);
    const double ref_b = oracle::bias(kd, y, ref.alpha, c);
    worst_obj = std::max(worst_obj, std::abs(sol.objective - ref.objective));
    const auto probes = oracle::random_rows(30, 3, rng, 1.5);
    for (const auto& p : probes) {
      double fa = sol.b, fb = ref_b;
      for (std::size_t i = 0; i < n; ++i) {
        const double kv = gmkl::kernel_k1(xs[i], p, 0.5);
        fa += sol.alpha[i] * y[i] * kv;
        fb += ref.alpha[i] * y[i] * kv;
      }
      worst_score = std::max(worst_score, std::abs(fa - fb));
    }
  }
  o.require(worst_obj <= 1e-4, "objective gap " + fmt(worst_obj));
  o.require(worst_score <= 1e-3, "score gap " + fmt(worst_score));
  if (o.ok) o.detail = "objective gap " + fmt(worst_obj) + ", score gap " + fmt(worst_score);
  return o;
}

Outcome alternation() {
  Outcome o;
  std::mt19937_64 rng(106);
  std::normal_distribution<double> n(0.0, 1.0);
  auto blob = [&](std::size_t count, std::size_t dim, double shift, std::vector<int>& labels) {
    std::vector<std::vector<double>> xs;
    labels.clear();
    for (std::size_t i = 0; i < count; ++i) {
      const int y = i % 2 == 0 ? 1 : -1;
      std::vector<double> x(dim);
      for (auto& v : x) v = shift * y + n(rng);
      xs.push_back(std::move(x));
      labels.push_back(y);
    }
    return xs;
  };
  double worst_grad = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> y, unused;
    const auto xs = blob(14, 3, 0.6, y);
    const auto ds = blob(14, 5, 0.4, unused);
    const auto k1 = gmkl::rbf_gram(xs, 0.5);
    const auto k2 = gmkl::linear_gram(ds);
    const auto r = gmkl::train_kernels(k1, k2, y, gmkl::GmklConfig{});
    for (std::size_t s = 0; s < r.history.size(); ++s) {
      const auto& it = r.history[s];
      o.require(it.c[0] >= 0.0 && it.c[1] >= 0.0 && std::abs(it.c[0] + it.c[1] - 1.0) <= 1e-10,
                "iterate left the simplex");
      if (s > 0) o.require(it.objective_f <= r.history[s - 1].objective_f + 1e-9, "F increased");
    }
    gmkl::SmoOptions tight;
    tight.tol_kkt = 1e-10;
    tight.max_passes = 100000;
    const gmkl::Weights c{0.3 + 0.04 * trial, 0.7 - 0.04 * trial};
    const auto sol = gmkl::solve_dual(gmkl::combine(c, k1, k2), y, tight);
    const auto g = gmkl::gradient_j(k1, k2, y, sol.alpha);
    for (int t = 0; t < 2; ++t) {
      auto up = c, down = c;
      up[t] += 1e-4;
      down[t] -= 1e-4;
      const double fd = (gmkl::solve_dual(gmkl::combine(up, k1, k2), y, tight).objective -
                         gmkl::solve_dual(gmkl::combine(down, k1, k2), y, tight).objective) / 2e-4;
      worst_grad = std::max(worst_grad, oracle::rel_diff(fd, g[t]));
    }
    const auto sym = gmkl::train_kernels(k1, k1, y, gmkl::GmklConfig{});
    o.require(std::abs(sym.c[0] - 0.5) <= 1e-6, "symmetric kernels moved c to " + fmt(sym.c[0]));
  }
  o.require(worst_grad <= 1e-3, "gradient relative error " + fmt(worst_grad));
  if (o.ok) o.detail = "gradient relative error " + fmt(worst_grad);
  return o;
}

Outcome hter() {
  Outcome o;
  std::vector<eval::ScoredSample> s;
  for (int k = 0; k < 5; ++k) s.push_back({"l", k == 0 ? -1.0 : 1.0, Label::Live});
  for (int k = 0; k < 10; ++k) s.push_back({"f", k == 0 ? 1.0 : -1.0, Label::Fake});
  const auto r = eval::evaluate(s, 0.0);
  o.require(*r.far == 0.1 && *r.frr == 0.2, "constructed rates wrong");
  o.require(std::abs(*r.hter - 0.15) <= 1e-15, "constructed HTER " + fmt(*r.hter));

  std::mt19937_64 rng(107);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<eval::ScoredSample> devel;
    for (int k = 0; k < 40; ++k) {
      const bool live = k == 0 || (k != 1 && coin(rng));
      double v = n(rng) + (live ? 0.7 : -0.7);
      if (trial % 4 == 0) v = std::round(v * 3.0) / 3.0;
      devel.push_back({"d", v, live ? Label::Live : Label::Fake});
    }
    const double t = eval::select_threshold(devel);
    o.require(t == oracle::scan_threshold(devel), "threshold differs from scan on set " + std::to_string(trial));
    for (double probe : {t, t - 0.5, t + 0.5}) {
      const auto rep = eval::evaluate(devel, probe);
      o.require(*rep.hter == (*rep.far + *rep.frr) / 2.0, "HTER identity broken");
    }
  }
  return o;
}


Outcome end_to_end(const fs::path& root) {
  Outcome o;
  const auto t0 = Clock::now();
  synthetic::CorpusSpec spec;
  spec.seed = 7;
  const auto corpus = synthetic::write_corpus(spec, (root / "corpus").string());
  const auto manifest = pipeline::load_manifest(corpus.manifest_path);
  const auto deep = read_feature_file(corpus.deep_path);
  pipeline::PipelineConfig cfg;
  cfg.seed = 7;
  const auto summary = pipeline::run_all(manifest, cfg, deep, (root / "run_a").string());
  const double elapsed = seconds_since(t0);
  const auto& test = summary.reports.test;
  o.require(test.accuracy >= 0.95, "test accuracy " + fmt(test.accuracy));
  o.require(test.hter && *test.hter <= 0.05, "test HTER " + fmt(test.hter.value_or(1.0)));
  o.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s");
  if (o.ok) {
    o.detail = "test accuracy " + fmt(test.accuracy) + ", test HTER " + fmt(*test.hter) + ", devel HTER " +
               fmt(summary.reports.devel.hter.value_or(-1.0)) + ", " + fmt(elapsed) + " s";
  }
  return o;
}

Outcome determinism(const fs::path& root) {
  Outcome o;
  const auto manifest = pipeline::load_manifest((root / "corpus" / "manifest.tsv").string());
  const auto deep = read_feature_file((root / "corpus" / "deep.ldfv").string());
  pipeline::PipelineConfig cfg;
  cfg.seed = 7;
  cfg.workers = 1;  // a different fan-out must not change any byte
  pipeline::run_all(manifest, cfg, deep, (root / "run_b").string());
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "run_a")) {
    const auto name = entry.path().filename();
    o.require(slurp(entry.path()) == slurp(root / "run_b" / name), name.string() + " differs");
    ++compared;
  }
  o.require(compared >= 6, "only " + std::to_string(compared) + " artifacts written");
  if (o.ok) o.detail = std::to_string(compared) + " files byte-identical";
  return o;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "livediff_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"brightness conservation", brightness},
      {"diffusion fixed point and composition", fixed_point},
      {"edge enhancement", edge_enhancement},
      {"flux derivative", flux_derivative},
      {"kernel matrix nonsingular", theorem_one},
      {"gram-trick equivalence", gram_equivalence},
      {"dual solver oracle", dual_oracle},
      {"gmkl alternation", alternation},
      {"hter identity and threshold scan", hter},
      {"synthetic end-to-end benchmark", [&] { return end_to_end(root); }},
      {"end-to-end determinism", [&] { return determinism(root); }},
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.ok) ++failures;
    std::printf("%s  %-40s %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  fs::remove_all(root);
  return failures == 0 ? 0 : 1;
}
