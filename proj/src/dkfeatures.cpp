#include "livediff/dkfeatures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "json.hpp"
#include "livediff/error.hpp"
#include "livediff/simd.hpp"

namespace livediff::dk {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::DimensionMismatch, "matrix storage does not match its shape");
  }
}

FeatureMatrix clip_to_matrix(const Clip& clip) {
  validate_clip(clip);
  const std::size_t d = clip.width() * clip.height();
  const std::size_t n = clip.frames.size();
  FeatureMatrix m(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto px = clip.frames[j].pixels();
    for (std::size_t i = 0; i < d; ++i) m(i, j) = px[i];
  }
  return m;
}

namespace {

std::string fingerprint_of(std::span<const FeatureMatrix> training) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 1099511628211ull;
    }
  };
  for (const auto& m : training) {
    const std::uint64_t shape[2] = {m.rows(), m.cols()};
    mix(shape, sizeof(shape));
    mix(m.values().data(), m.values().size() * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Orthonormalizes `v` against the first `count` rows of `basis` (modified
// Gram-Schmidt, two passes). Returns false if nothing independent remains.
bool orthonormalize(Eigen::VectorXd& v, const Eigen::MatrixXd& basis, std::size_t count) {
  const double start = v.norm();
  if (start == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t k = 0; k < count; ++k) {
      v -= basis.row(static_cast<Eigen::Index>(k)).dot(v) * basis.row(static_cast<Eigen::Index>(k)).transpose();
    }
  }
  const double norm = v.norm();
  if (norm < 1e-8 * start) return false;
  v /= norm;
  return true;
}

void fix_sign(std::span<double> direction) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < direction.size(); ++k) {
    if (std::abs(direction[k]) > std::abs(direction[best])) best = k;
  }
  if (direction[best] < 0.0) {
    for (auto& v : direction) v = -v;
  }
}

}  // namespace

Reducer fit_reducer(std::span<const FeatureMatrix> training, std::size_t lowd) {
  if (training.empty()) throw Error(ErrorKind::InsufficientSamples, "no training matrices");
  const std::size_t d = training.front().rows();
  std::size_t total = 0;
  for (const auto& m : training) {
    if (m.rows() != d) {
      throw Error(ErrorKind::DimensionMismatch,
                  "training matrices disagree on d (" + std::to_string(m.rows()) + " vs " +
                      std::to_string(d) + ")");
    }
    total += m.cols();
  }
  if (lowd == 0 || lowd > d) {
    throw Error(ErrorKind::InvalidConfig,
                "lowd " + std::to_string(lowd) + " must lie in [1, " + std::to_string(d) + "]");
  }
  if (total < lowd) {
    throw Error(ErrorKind::InsufficientSamples,
                std::to_string(total) + " columns cannot support lowd " + std::to_string(lowd));
  }

  using Eigen::Index;
  Eigen::MatrixXd x(static_cast<Index>(d), static_cast<Index>(total));
  Index col = 0;
  for (const auto& m : training) {
    for (std::size_t j = 0; j < m.cols(); ++j, ++col) {
      for (std::size_t i = 0; i < d; ++i) x(static_cast<Index>(i), col) = m(i, j);
    }
  }
  const Eigen::VectorXd mean = x.rowwise().mean();
  x.colwise() -= mean;
  const double denom = static_cast<double>(std::max<std::size_t>(total - 1, 1));

  // Eigenpairs of the covariance, largest first. With fewer samples than
  // dimensions the (smaller) Gram matrix shares the nonzero spectrum.
  Eigen::MatrixXd directions(static_cast<Index>(lowd), static_cast<Index>(d));
  std::vector<double> variance(lowd, 0.0);
  std::size_t found = 0;
  if (d <= total) {
    const Eigen::MatrixXd cov = (x * x.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    for (std::size_t k = 0; k < lowd; ++k) {
      const Index src = static_cast<Index>(d - 1 - k);
      Eigen::VectorXd v = eig.eigenvectors().col(src);
      if (!orthonormalize(v, directions, found)) continue;
      directions.row(static_cast<Index>(found)) = v.transpose();
      variance[found] = std::max(eig.eigenvalues()[src], 0.0);
      ++found;
    }
  } else {
    const Eigen::MatrixXd gram = (x.transpose() * x) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double top = std::max(eig.eigenvalues()[static_cast<Index>(total - 1)], 0.0);
    const double cutoff = top * 1e-12 * static_cast<double>(std::max(d, total));
    for (std::size_t k = 0; k < lowd; ++k) {
      const Index src = static_cast<Index>(total - 1 - k);
      const double lambda = eig.eigenvalues()[src];
      if (!(lambda > cutoff) || lambda <= 0.0) break;
      Eigen::VectorXd v = x * eig.eigenvectors().col(src);
      if (!orthonormalize(v, directions, found)) continue;
      directions.row(static_cast<Index>(found)) = v.transpose();
      variance[found] = lambda;
      ++found;
    }
  }
  // Zero-variance completion from the standard basis.
  for (std::size_t e = 0; found < lowd && e < d; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(static_cast<Index>(d), static_cast<Index>(e));
    if (!orthonormalize(v, directions, found)) continue;
    directions.row(static_cast<Index>(found)) = v.transpose();
    variance[found] = 0.0;
    ++found;
  }

  Reducer r;
  r.input_dim = d;
  r.output_dim = lowd;
  r.mean.assign(mean.data(), mean.data() + d);
  r.projection.resize(lowd * d);
  for (std::size_t k = 0; k < lowd; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      r.projection[k * d + i] = directions(static_cast<Index>(k), static_cast<Index>(i));
    }
    fix_sign(std::span(r.projection).subspan(k * d, d));
  }
  r.explained_variance = std::move(variance);
  r.fingerprint = fingerprint_of(training);
  return r;
}

FeatureMatrix reduce(const FeatureMatrix& m, const Reducer& r) {
  if (m.rows() != r.input_dim) {
    throw Error(ErrorKind::DimensionMismatch, "matrix has " + std::to_string(m.rows()) +
                                                  " rows, reducer expects " +
                                                  std::to_string(r.input_dim));
  }
  const auto& kernels = simd::active_kernels();
  const std::size_t d = r.input_dim;
  FeatureMatrix out(r.output_dim, m.cols());
  std::vector<double> centred(d);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < d; ++i) centred[i] = m(i, j) - r.mean[i];
    for (std::size_t k = 0; k < r.output_dim; ++k) {
      out(k, j) = kernels.dot(r.projection.data() + k * d, centred.data(), d);
    }
  }
  return out;
}

std::vector<double> pairwise_sq_dists(const FeatureMatrix& m) {
  const auto& kernels = simd::active_kernels();
  const std::size_t p = m.rows();
  const std::size_t n = m.cols();
  std::vector<double> norms(p);
  for (std::size_t i = 0; i < p; ++i) norms[i] = kernels.dot(m.row(i).data(), m.row(i).data(), n);
  std::vector<double> out(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const double g = kernels.dot(m.row(i).data(), m.row(j).data(), n);
      const double sq = std::max(norms[i] - 2.0 * g + norms[j], 0.0);
      out[i * p + j] = sq;
      out[j * p + i] = sq;
    }
  }
  return out;
}

DKFeature kernel_matrix(const FeatureMatrix& m, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidConfig, "kernel gamma must be positive and finite");
  }
  DKFeature f;
  f.dim = m.rows();
  f.gamma = gamma;
  f.matrix = pairwise_sq_dists(m);
  simd::active_kernels().neg_scaled_exp(f.matrix.data(), f.matrix.data(), f.matrix.size(), gamma);
  for (std::size_t i = 0; i < f.dim; ++i) {
    f.matrix[i * f.dim + i] = 1.0;
    for (std::size_t j = i + 1; j < f.dim; ++j) f.matrix[j * f.dim + i] = f.matrix[i * f.dim + j];
  }
  return f;
}

GammaPolicy parse_gamma_policy(const std::string& text) {
  if (text == "median") return GammaPolicy::median();
  try {
    std::size_t used = 0;
    const double g = std::stod(text, &used);
    if (used == text.size() && g > 0.0 && std::isfinite(g)) return GammaPolicy::fixed(g);
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidConfig, "dk gamma policy '" + text + "' (median or a positive number)");
}

std::string to_string(const GammaPolicy& policy) {
  if (policy.kind == GammaPolicyKind::Median) return "median";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", policy.value);
  return buf;
}

double median_gamma(std::span<const FeatureMatrix> reduced, std::size_t lowd) {
  std::vector<double> pooled;
  for (const auto& m : reduced) {
    const auto sq = pairwise_sq_dists(m);
    const std::size_t p = m.rows();
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        if (sq[i * p + j] > 0.0) pooled.push_back(sq[i * p + j]);
      }
    }
  }
  if (pooled.empty()) return 1.0 / static_cast<double>(lowd);
  const std::size_t mid = pooled.size() / 2;
  std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(mid), pooled.end());
  double median = pooled[mid];
  if (pooled.size() % 2 == 0) {
    const double below = *std::max_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + below);
  }
  return 1.0 / median;
}

DKFeature extract_dk_diffused(const Clip& diffused, const Reducer& r, double gamma) {
  return kernel_matrix(reduce(clip_to_matrix(diffused), r), gamma);
}

DKFeature extract_dk(const Clip& clip, const diffusion::DiffusionConfig& dcfg, const Reducer& r,
                     double gamma) {
  return extract_dk_diffused(diffusion::diffuse_clip(clip, dcfg), r, gamma);
}

std::string reducer_to_json(const Reducer& r) {
  nlohmann::json doc;
  doc["format"] = "livediff-reducer";
  doc["version"] = Reducer::kVersion;
  doc["kind"] = r.kind;
  doc["d"] = r.input_dim;
  doc["lowd"] = r.output_dim;
  doc["fingerprint"] = r.fingerprint;
  doc["mean"] = r.mean;
  doc["projection"] = r.projection;
  doc["explained_variance"] = r.explained_variance;
  return doc.dump() + "\n";
}

Reducer reducer_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedFile, std::string("reducer: ") + e.what());
  }
  if (doc.value("format", "") != "livediff-reducer") {
    throw Error(ErrorKind::MalformedFile, "not a reducer document");
  }
  if (doc.value("version", -1) != Reducer::kVersion) {
    throw Error(ErrorKind::VersionMismatch, "reducer version " + doc["version"].dump());
  }
  Reducer r;
  try {
    r.kind = doc.at("kind").get<std::string>();
    r.input_dim = doc.at("d").get<std::size_t>();
    r.output_dim = doc.at("lowd").get<std::size_t>();
    r.fingerprint = doc.at("fingerprint").get<std::string>();
    r.mean = doc.at("mean").get<std::vector<double>>();
    r.projection = doc.at("projection").get<std::vector<double>>();
    r.explained_variance = doc.at("explained_variance").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedFile, std::string("reducer: ") + e.what());
  }
  if (r.kind != "pca") throw Error(ErrorKind::MalformedFile, "reducer kind '" + r.kind + "'");
  if (r.mean.size() != r.input_dim || r.projection.size() != r.input_dim * r.output_dim ||
      r.explained_variance.size() != r.output_dim) {
    throw Error(ErrorKind::MalformedFile, "reducer arrays do not match d/lowd");
  }
  return r;
}

}  // namespace livediff::dk
