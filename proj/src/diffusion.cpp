#include "livediff/diffusion.hpp"

#include <cmath>
#include <vector>

#include "livediff/error.hpp"

namespace livediff::diffusion {

ConductanceKind parse_conductance(const std::string& name) {
  if (name == "exp" || name == "exponential") return ConductanceKind::Exponential;
  if (name == "rational") return ConductanceKind::Rational;
  throw Error(ErrorKind::InvalidConfig, "conductance '" + name + "' (expected exp|rational)");
}

const char* to_string(ConductanceKind kind) noexcept {
  return kind == ConductanceKind::Exponential ? "exp" : "rational";
}

void DiffusionConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 0.25)) {
    throw Error(ErrorKind::InvalidConfig,
                "lambda " + std::to_string(lambda) + " outside the stable range [0, 0.25]");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorKind::InvalidConfig, "kappa must be positive and finite");
  }
}

double conductance(double grad_mag, double kappa, ConductanceKind kind) {
  const double r = grad_mag / kappa;
  return kind == ConductanceKind::Exponential ? std::exp(-(r * r)) : 1.0 / (1.0 + r * r);
}

NeighborGradients neighbor_gradients(const GrayImage& img) {
  const auto w = img.width();
  const auto h = img.height();
  NeighborGradients g{GrayImage(w, h), GrayImage(w, h), GrayImage(w, h), GrayImage(w, h)};
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double centre = img.at(i, j);
      if (i > 0) g.north.at(i, j) = img.at(i - 1, j) - centre;
      if (i + 1 < h) g.south.at(i, j) = img.at(i + 1, j) - centre;
      if (j + 1 < w) g.east.at(i, j) = img.at(i, j + 1) - centre;
      if (j > 0) g.west.at(i, j) = img.at(i, j - 1) - centre;
    }
  }
  return g;
}

GrayImage diffuse_step(const GrayImage& img, const DiffusionConfig& cfg,
                       const simd::KernelTable& kernels) {
  cfg.validate();
  require_stencil_size(img);
  const auto w = img.width();
  const auto h = img.height();
  const double inv_k2 = 1.0 / (cfg.kappa * cfg.kappa);

  // horizontal[r][c]: flux across the edge (r,c)-(r,c+1); vertical[r][c]: (r,c)-(r+1,c).
  std::vector<double> horizontal(h * (w - 1));
  std::vector<double> vertical((h - 1) * w);
  for (std::size_t r = 0; r < h; ++r) {
    const double* row = img.row(r).data();
    kernels.edge_flux(row, row + 1, horizontal.data() + r * (w - 1), w - 1, inv_k2,
                      cfg.conductance);
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    kernels.edge_flux(img.row(r).data(), img.row(r + 1).data(), vertical.data() + r * w, w,
                      inv_k2, cfg.conductance);
  }

  GrayImage out(w, h);
  for (std::size_t r = 0; r < h; ++r) {
    const double* src = img.row(r).data();
    const double* fh = horizontal.data() + r * (w - 1);
    const double* south = r + 1 < h ? vertical.data() + r * w : nullptr;
    const double* north = r > 0 ? vertical.data() + (r - 1) * w : nullptr;
    double* dst = out.row(r).data();
    for (std::size_t c = 0; c < w; ++c) {
      const double east = c + 1 < w ? fh[c] : 0.0;
      const double west = c > 0 ? fh[c - 1] : 0.0;
      const double s = south != nullptr ? south[c] : 0.0;
      const double n = north != nullptr ? north[c] : 0.0;
      dst[c] = src[c] + cfg.lambda * ((east - west) + (s - n));
    }
  }
  return out;
}

GrayImage diffuse_step(const GrayImage& img, const DiffusionConfig& cfg) {
  return diffuse_step(img, cfg, simd::active_kernels());
}

GrayImage diffuse(const GrayImage& img, const DiffusionConfig& cfg,
                  const simd::KernelTable& kernels) {
  cfg.validate();
  require_stencil_size(img);
  GrayImage current = img;
  for (std::size_t l = 0; l < cfg.iterations; ++l) current = diffuse_step(current, cfg, kernels);
  return current;
}

GrayImage diffuse(const GrayImage& img, const DiffusionConfig& cfg) {
  return diffuse(img, cfg, simd::active_kernels());
}

Clip diffuse_clip(const Clip& clip, const DiffusionConfig& cfg) {
  validate_clip(clip);
  Clip out{{}, clip.source_id, clip.label};
  out.frames.reserve(clip.frames.size());
  for (const auto& f : clip.frames) out.frames.push_back(diffuse(f, cfg));
  return out;
}

Flux flux_diagnostic(double slope, double kappa, ConductanceKind kind) {
  const double r2 = (slope / kappa) * (slope / kappa);
  if (kind == ConductanceKind::Exponential) {
    const double g = std::exp(-r2);
    return {g * slope, g * (1.0 - 2.0 * r2)};
  }
  const double denom = 1.0 + r2;
  return {slope / denom, (1.0 - r2) / (denom * denom)};
}

}  // namespace livediff::diffusion
