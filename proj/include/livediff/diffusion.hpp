#pragma once

#include <cstddef>
#include <string>

#include "livediff/image.hpp"
#include "livediff/simd.hpp"

namespace livediff::diffusion {

using simd::ConductanceKind;

ConductanceKind parse_conductance(const std::string& name);
const char* to_string(ConductanceKind kind) noexcept;

/// Perona-Malik explicit scheme parameters. lambda must lie in [0, 1/4] for
/// stability; kappa is the edge-contrast scale K.
struct DiffusionConfig {
  std::size_t iterations = 15;
  double lambda = 0.15;
  double kappa = 15.0;
  ConductanceKind conductance = ConductanceKind::Exponential;

  void validate() const;
};

/// g(s) for s = |difference|: exp(-(s/K)^2) or 1 / (1 + (s/K)^2).
double conductance(double grad_mag, double kappa, ConductanceKind kind);

/// Nearest-neighbour differences. A neighbour that falls outside the image
/// contributes a zero difference.
struct NeighborGradients {
  GrayImage north;
  GrayImage south;
  GrayImage east;
  GrayImage west;
};

NeighborGradients neighbor_gradients(const GrayImage& img);

/// One Jacobi update of the 4-neighbour scheme. Each interior edge flux is
/// evaluated once and applied to both endpoints with opposite signs, so the
/// pixel sum is conserved up to summation round-off.
GrayImage diffuse_step(const GrayImage& img, const DiffusionConfig& cfg);

GrayImage diffuse_step(const GrayImage& img, const DiffusionConfig& cfg,
                       const simd::KernelTable& kernels);

/// diffuse_step applied cfg.iterations times.
GrayImage diffuse(const GrayImage& img, const DiffusionConfig& cfg);

GrayImage diffuse(const GrayImage& img, const DiffusionConfig& cfg,
                  const simd::KernelTable& kernels);

Clip diffuse_clip(const Clip& clip, const DiffusionConfig& cfg);

struct Flux {
  double phi;
  double phi_prime;
};

/// phi(s) = g(|s|) * s and its analytic derivative. phi' < 0 marks slopes
/// that steepen under diffusion; for the exponential kind that is |s| > K/sqrt(2).
Flux flux_diagnostic(double slope, double kappa, ConductanceKind kind);

}  // namespace livediff::diffusion
