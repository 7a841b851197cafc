#pragma once

// Synthetic live/fake corpus with constructed separability, used for the
// end-to-end benchmark and the demo. Live clips carry sharp edges and
// depth-like shading; fake clips imitate a recapture (blur, flattened
// contrast, additive noise).

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "livediff/feature_file.hpp"
#include "livediff/image.hpp"

namespace livediff::synthetic {

struct CorpusSpec {
  std::size_t live_clips = 200;
  std::size_t fake_clips = 200;
  std::size_t frames = 8;
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t deep_dim = 4096;
  /// Fractions of each class assigned to train and devel; the rest is test.
  double train_fraction = 0.4;
  double devel_fraction = 0.2;
  /// Separation of the class means of the deep vectors, in noise units.
  double deep_separation = 0.06;
  std::uint64_t seed = 0;
};

Clip make_clip(Label label, std::size_t frames, std::size_t width, std::size_t height,
               std::mt19937_64& rng);

struct Corpus {
  std::string manifest_path;
  std::string deep_path;
};

/// Writes frames/<id>/<k>.pgm, manifest.tsv and deep.ldfv under out_dir.
Corpus write_corpus(const CorpusSpec& spec, const std::string& out_dir);

}  // namespace livediff::synthetic
