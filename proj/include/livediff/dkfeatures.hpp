#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "livediff/diffusion.hpp"
#include "livediff/image.hpp"

namespace livediff::dk {

/// Dense row-major real matrix. In the D-K path a row is one feature traced
/// across the n frames of a clip.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// d = width*height rows, one column per frame (row-major pixel order).
FeatureMatrix clip_to_matrix(const Clip& clip);

/// Linear PCA projection fitted on pooled training columns.
struct Reducer {
  static constexpr int kVersion = 1;

  std::string kind = "pca";
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<double> mean;                // input_dim
  std::vector<double> projection;          // output_dim x input_dim, orthonormal rows
  std::vector<double> explained_variance;  // output_dim, decreasing
  std::string fingerprint;

  std::span<const double> direction(std::size_t k) const {
    return {projection.data() + k * input_dim, input_dim};
  }
};

/// Principal directions are ordered by decreasing variance and sign-fixed so
/// each direction's largest-magnitude entry is positive. Directions beyond the
/// data rank are completed deterministically from the standard basis.
Reducer fit_reducer(std::span<const FeatureMatrix> training, std::size_t lowd);

FeatureMatrix reduce(const FeatureMatrix& m, const Reducer& r);

std::string reducer_to_json(const Reducer& r);
Reducer reducer_from_json(const std::string& text);

/// Squared Euclidean distances between rows via ||a||^2 - 2 a.b + ||b||^2.
/// Round-off negatives clamp to zero; the diagonal is exactly zero.
std::vector<double> pairwise_sq_dists(const FeatureMatrix& m);

struct DKFeature {
  std::size_t dim = 0;         // lowd
  double gamma = 0.0;
  std::vector<double> matrix;  // dim x dim, row-major, symmetric, unit diagonal

  double operator()(std::size_t i, std::size_t j) const { return matrix[i * dim + j]; }
  /// Row-major flattening of the full matrix.
  std::span<const double> flat() const noexcept { return matrix; }
};

DKFeature kernel_matrix(const FeatureMatrix& m, double gamma);

enum class GammaPolicyKind { Median, Fixed };

struct GammaPolicy {
  GammaPolicyKind kind = GammaPolicyKind::Median;
  double value = 0.0;  // used when kind == Fixed

  static GammaPolicy median() { return {}; }
  static GammaPolicy fixed(double g) { return {GammaPolicyKind::Fixed, g}; }
};

GammaPolicy parse_gamma_policy(const std::string& text);
std::string to_string(const GammaPolicy& policy);

/// 1 / median of the nonzero pairwise row distances pooled over the reduced
/// training matrices; 1/lowd when every distance is zero.
double median_gamma(std::span<const FeatureMatrix> reduced, std::size_t lowd);

/// Diffuse every frame, flatten, project, kernelize.
DKFeature extract_dk(const Clip& clip, const diffusion::DiffusionConfig& dcfg, const Reducer& r,
                     double gamma);

/// Same as extract_dk for an already diffused clip.
DKFeature extract_dk_diffused(const Clip& diffused, const Reducer& r, double gamma);

}  // namespace livediff::dk
