#include "livediff/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "livediff/error.hpp"

namespace livediff::synthetic {

namespace {

struct Face {
  double cx, cy, rx, ry;
  double background, skin, shading, bulge, theta;
  double eye_dark;
};

Face random_face(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  Face f{};
  f.cx = static_cast<double>(w) / 2.0 + range(-3.0, 3.0);
  f.cy = static_cast<double>(h) / 2.0 + range(-3.0, 3.0);
  f.rx = static_cast<double>(w) * range(0.28, 0.36);
  f.ry = static_cast<double>(h) * range(0.36, 0.44);
  f.background = range(30.0, 80.0);
  f.skin = range(120.0, 170.0);
  f.shading = range(30.0, 50.0);
  f.bulge = range(20.0, 35.0);
  f.theta = range(0.0, 2.0 * std::numbers::pi);
  f.eye_dark = range(60.0, 90.0);
  return f;
}

// Shaded ellipse with hard borders, two eyes and a mouth. `blink` fills the eyes in.
GrayImage render(const Face& f, std::size_t w, std::size_t h, double dx, double dy, bool blink) {
  GrayImage img(w, h);
  const double eye_y = f.cy + dy - 0.25 * f.ry;
  const double mouth_y = f.cy + dy + 0.45 * f.ry;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double u = (static_cast<double>(x) - f.cx - dx) / f.rx;
      const double v = (static_cast<double>(y) - f.cy - dy) / f.ry;
      const double r2 = u * u + v * v;
      double value;
      if (r2 <= 1.0) {
        value = f.skin + f.shading * (u * std::cos(f.theta) + v * std::sin(f.theta)) +
                f.bulge * (1.0 - r2);
        const double py = static_cast<double>(y);
        const double px = static_cast<double>(x);
        for (const double side : {-1.0, 1.0}) {
          const double ex = f.cx + dx + side * 0.4 * f.rx;
          if (std::abs(px - ex) <= 2.5 && std::abs(py - eye_y) <= (blink ? 0.5 : 1.5)) {
            value -= f.eye_dark;
          }
        }
        if (std::abs(px - f.cx - dx) <= 0.3 * f.rx && std::abs(py - mouth_y) <= 1.0) {
          value -= 0.7 * f.eye_dark;
        }
      } else {
        value = f.background + 10.0 * static_cast<double>(y) / static_cast<double>(h);
      }
      img.at(y, x) = value;
    }
  }
  return img;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += taps[k + radius];
  }
  for (auto& t : taps) t /= total;
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  GrayImage tmp(img.width(), img.height());
  GrayImage out(img.width(), img.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] * img.at(y, std::clamp(x + k, 0L, w - 1));
      }
      tmp.at(y, x) = acc;
    }
  }
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += taps[k + radius] * tmp.at(std::clamp(y + k, 0L, h - 1), x);
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

void add_noise_and_clamp(GrayImage& img, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : img.pixels()) p = std::clamp(p + noise(rng), 0.0, 255.0);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

}  // namespace

Clip make_clip(Label label, std::size_t frames, std::size_t width, std::size_t height,
               std::mt19937_64& rng) {
  if (frames == 0) throw Error(ErrorKind::InvalidConfig, "a clip needs at least one frame");
  Clip clip;
  clip.label = label;
  const Face face = random_face(width, height, rng);
  std::uniform_int_distribution<int> jitter(-1, 1);
  std::uniform_int_distribution<std::size_t> pick(0, frames - 1);

  if (label == Label::Live) {
    const std::size_t blink_at = pick(rng);
    for (std::size_t k = 0; k < frames; ++k) {
      auto img = render(face, width, height, jitter(rng), jitter(rng), frames > 1 && k == blink_at);
      add_noise_and_clamp(img, 2.0, rng);
      clip.frames.push_back(std::move(img));
    }
  } else {
    // A printed or replayed face: one static picture, blurred and washed out.
    Face flat = face;
    flat.shading *= 0.35;
    flat.bulge *= 0.35;
    const GrayImage photo = gaussian_blur(render(flat, width, height, 0.0, 0.0, false), 1.3);
    const double mean = photo.sum() / static_cast<double>(photo.size());
    for (std::size_t k = 0; k < frames; ++k) {
      const double dx = 0.5 * jitter(rng);
      const double dy = 0.5 * jitter(rng);
      GrayImage img(width, height);
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          const double sx = std::clamp(static_cast<double>(x) - dx, 0.0, static_cast<double>(width - 1));
          const double sy = std::clamp(static_cast<double>(y) - dy, 0.0, static_cast<double>(height - 1));
          const auto x0 = static_cast<std::size_t>(sx);
          const auto y0 = static_cast<std::size_t>(sy);
          const auto x1 = std::min(x0 + 1, width - 1);
          const auto y1 = std::min(y0 + 1, height - 1);
          const double fx = sx - static_cast<double>(x0);
          const double fy = sy - static_cast<double>(y0);
          const double v = (1 - fy) * ((1 - fx) * photo.at(y0, x0) + fx * photo.at(y0, x1)) +
                           fy * ((1 - fx) * photo.at(y1, x0) + fx * photo.at(y1, x1));
          img.at(y, x) = mean + 0.55 * (v - mean);
        }
      }
      add_noise_and_clamp(img, 5.0, rng);
      clip.frames.push_back(std::move(img));
    }
  }
  return clip;
}

Corpus write_corpus(const CorpusSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Class means of the deep vectors: a shared offset plus +-separation/2
  // along a random sign pattern.
  auto mean_rng = stream(spec.seed, 0xdee9, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> shared(spec.deep_dim);
  std::vector<double> direction(spec.deep_dim);
  for (std::size_t k = 0; k < spec.deep_dim; ++k) {
    shared[k] = normal(mean_rng);
    direction[k] = coin(mean_rng) ? 1.0 : -1.0;
  }

  FeatureFile deep{"deep", spec.deep_dim, {}};
  std::string manifest = "# source_id\tsplit\tlabel\tframes\n";
  for (const Label label : {Label::Live, Label::Fake}) {
    const std::size_t count = label == Label::Live ? spec.live_clips : spec.fake_clips;
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * count));
    const auto n_devel = static_cast<std::size_t>(std::llround(spec.devel_fraction * count));
    const double sign = label == Label::Live ? 1.0 : -1.0;
    for (std::size_t i = 0; i < count; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%04zu", to_string(label), i);
      auto rng = stream(spec.seed, label == Label::Live ? 1 : 2, i);
      auto clip = make_clip(label, spec.frames, spec.width, spec.height, rng);

      std::string paths;
      for (std::size_t k = 0; k < clip.frames.size(); ++k) {
        const auto rel = (fs::path("frames") / id / (std::to_string(k) + ".pgm")).string();
        imaging::write_pgm((fs::path(out_dir) / rel).string(), clip.frames[k], imaging::PgmDepth::Bits8);
        paths += (k ? "," : "") + rel;
      }
      const char* split = i < n_train ? "train" : i < n_train + n_devel ? "devel" : "test";
      manifest += std::string(id) + "\t" + split + "\t" + to_string(label) + "\t" + paths + "\n";

      FeatureRecord rec{id, std::vector<float>(spec.deep_dim)};
      for (std::size_t k = 0; k < spec.deep_dim; ++k) {
        rec.values[k] = static_cast<float>(shared[k] + sign * 0.5 * spec.deep_separation * direction[k] +
                                           normal(rng));
      }
      deep.records.push_back(std::move(rec));
    }
  }
  Corpus corpus{(fs::path(out_dir) / "manifest.tsv").string(), (fs::path(out_dir) / "deep.ldfv").string()};
  write_file_atomic(corpus.manifest_path, manifest);
  write_feature_file(corpus.deep_path, deep);
  return corpus;
}

}  // namespace livediff::synthetic
