#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace livediff::gmkl {

/// k1(a, b) = exp(-gamma * ||a - b||^2)
double kernel_k1(std::span<const double> a, std::span<const double> b, double gamma);

/// k2(a, b) = a . b
double kernel_k2(std::span<const double> a, std::span<const double> b);

/// Square symmetric matrix, row-major.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

using Weights = std::array<double, 2>;

double combined_kernel(std::size_t i, std::size_t j, const Weights& c, const KernelMatrix& k1,
                       const KernelMatrix& k2);

KernelMatrix combine(const Weights& c, const KernelMatrix& k1, const KernelMatrix& k2);

KernelMatrix rbf_gram(std::span<const std::vector<double>> xs, double gamma);
KernelMatrix linear_gram(std::span<const std::vector<double>> ys);

struct SmoOptions {
  double C = 1.0;
  double tol_kkt = 1e-6;
  /// Iteration cap is max_passes * N working-pair updates.
  std::size_t max_passes = 200;
  /// Called after every working-pair update with the current alphas.
  std::function<void(std::span<const double>)> on_step;
};

struct DualSolution {
  std::vector<double> alpha;
  double b = 0.0;
  double objective = 0.0;  // J = sum(alpha) - 1/2 alpha' Q alpha
  std::size_t iterations = 0;
  bool converged = true;
};

/// SMO on max sum(a) - 1/2 sum a_i a_j p_i p_j K_ij, s.t. sum a_i p_i = 0,
/// 0 <= a_i <= C. Working pair is the maximal KKT violator (lowest index on
/// ties). Labels are +1 / -1. Throws SingleClass when only one label occurs.
DualSolution solve_dual(const KernelMatrix& k, std::span<const int> labels,
                        const SmoOptions& options);

double dual_objective(const KernelMatrix& k, std::span<const int> labels,
                      std::span<const double> alpha);

/// dJ/dc_t = -1/2 sum a_i a_j p_i p_j K_t(i, j) at fixed optimal alpha.
Weights gradient_j(const KernelMatrix& k1, const KernelMatrix& k2, std::span<const int> labels,
                   std::span<const double> alpha);

/// F(c) = 1/2 (c1^2 + c2^2) + J(c)
double objective_f(const Weights& c, double j);

/// Euclidean projection onto {c >= 0, c1 + c2 = 1}.
Weights project_simplex(const Weights& v);

/// One projected-gradient step on F with the given step size.
Weights update_c(const Weights& c, const Weights& grad_j, double step);

struct GmklConfig {
  double C = 1.0;
  double rbf_gamma = 0.5;
  std::size_t max_outer = 50;
  std::size_t max_smo_passes = 200;
  double tol_kkt = 1e-6;
  double tol_c = 1e-6;
  double c_step = 1.0;

  void validate() const;
};

struct OuterIterate {
  Weights c;
  double objective_f;
  double j;
};

/// Alternating solve on precomputed kernels.
struct KernelTrainResult {
  Weights c{0.5, 0.5};
  DualSolution dual;
  std::vector<OuterIterate> history;  // history[0] is the initial point
  bool converged = true;
};

KernelTrainResult train_kernels(const KernelMatrix& k1, const KernelMatrix& k2,
                                std::span<const int> labels, const GmklConfig& cfg);

struct TrainingSet {
  std::vector<std::vector<double>> dk;    // flattened D-K features
  std::vector<std::vector<double>> deep;  // deep features
  std::vector<int> labels;                // +1 live, -1 fake

  std::size_t size() const noexcept { return labels.size(); }
  void validate() const;
};

/// Per-coordinate z-score of D-K vectors, scaled by 1/sqrt(dim) so squared
/// distances stay O(1); deep vectors are L2-normalized.
struct Preprocessing {
  std::vector<double> dk_mean;
  std::vector<double> dk_scale;

  static Preprocessing fit(std::span<const std::vector<double>> dk);
  std::vector<double> apply_dk(std::span<const double> x) const;
  static std::vector<double> apply_deep(std::span<const double> y);
};

struct GmklModel {
  static constexpr int kVersion = 1;

  Weights c{0.5, 0.5};
  double b = 0.0;
  double rbf_gamma = 0.5;
  std::vector<std::size_t> support;  // indices into the training set
  std::vector<double> alpha;         // per support vector
  std::vector<int> labels;           // per support vector
  std::vector<std::vector<double>> support_dk;    // preprocessed
  std::vector<std::vector<double>> support_deep;  // preprocessed
  Preprocessing prep;
  std::size_t dk_dim = 0;
  std::size_t deep_dim = 0;
  std::size_t training_size = 0;
  std::size_t outer_iterations = 0;
  bool converged = true;
  GmklConfig config;
};

GmklModel train(const TrainingSet& data, const GmklConfig& cfg);

/// f = sum alpha_i p_i (c1 k1 + c2 k2) + b on raw (unpreprocessed) inputs.
double decision(const GmklModel& model, std::span<const double> dk, std::span<const double> deep);

/// Same, on inputs already passed through model.prep.
double decision_preprocessed(const GmklModel& model, std::span<const double> dk,
                             std::span<const double> deep);

nlohmann::json to_json(const GmklModel& model);
GmklModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const GmklConfig& cfg);
GmklConfig config_from_json(const nlohmann::json& doc);

}  // namespace livediff::gmkl
