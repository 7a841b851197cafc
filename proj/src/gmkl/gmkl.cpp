#include "livediff/gmkl.hpp"

#include <algorithm>
#include <cmath>

#include "livediff/error.hpp"
#include "livediff/simd.hpp"

namespace livediff::gmkl {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "vector lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
}

}  // namespace

double kernel_k1(std::span<const double> a, std::span<const double> b, double gamma) {
  require_same_length(a, b);
  return std::exp(-gamma * simd::active_kernels().squared_distance(a.data(), b.data(), a.size()));
}

double kernel_k2(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  return simd::active_kernels().dot(a.data(), b.data(), a.size());
}

double combined_kernel(std::size_t i, std::size_t j, const Weights& c, const KernelMatrix& k1,
                       const KernelMatrix& k2) {
  return c[0] * k1(i, j) + c[1] * k2(i, j);
}

KernelMatrix combine(const Weights& c, const KernelMatrix& k1, const KernelMatrix& k2) {
  if (k1.n != k2.n) throw Error(ErrorKind::DimensionMismatch, "kernel sizes differ");
  KernelMatrix out{k1.n, std::vector<double>(k1.values.size())};
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = c[0] * k1.values[k] + c[1] * k2.values[k];
  }
  return out;
}

KernelMatrix rbf_gram(std::span<const std::vector<double>> xs, double gamma) {
  const auto& kernels = simd::active_kernels();
  const std::size_t n = xs.size();
  KernelMatrix k{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      require_same_length(xs[i], xs[j]);
      k(i, j) = kernels.squared_distance(xs[i].data(), xs[j].data(), xs[i].size());
    }
  }
  kernels.neg_scaled_exp(k.values.data(), k.values.data(), k.values.size(), gamma);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) k(j, i) = k(i, j);
  }
  return k;
}

KernelMatrix linear_gram(std::span<const std::vector<double>> ys) {
  const auto& kernels = simd::active_kernels();
  const std::size_t n = ys.size();
  KernelMatrix k{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      require_same_length(ys[i], ys[j]);
      k(i, j) = kernels.dot(ys[i].data(), ys[j].data(), ys[i].size());
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Weights gradient_j(const KernelMatrix& k1, const KernelMatrix& k2, std::span<const int> labels,
                   std::span<const double> alpha) {
  Weights g{0.0, 0.0};
  const std::size_t n = k1.n;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    double r1 = 0.0;
    double r2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      const double w = alpha[j] * labels[j];
      r1 += w * k1(i, j);
      r2 += w * k2(i, j);
    }
    g[0] += alpha[i] * labels[i] * r1;
    g[1] += alpha[i] * labels[i] * r2;
  }
  return {-0.5 * g[0], -0.5 * g[1]};
}

double objective_f(const Weights& c, double j) { return 0.5 * (c[0] * c[0] + c[1] * c[1]) + j; }

Weights project_simplex(const Weights& v) {
  const double c1 = std::clamp(0.5 * (v[0] - v[1] + 1.0), 0.0, 1.0);
  return {c1, 1.0 - c1};
}

Weights update_c(const Weights& c, const Weights& grad_j, double step) {
  return project_simplex({c[0] - step * (c[0] + grad_j[0]), c[1] - step * (c[1] + grad_j[1])});
}

void GmklConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(C)) throw Error(ErrorKind::InvalidConfig, "gmkl C must be positive");
  if (!positive(rbf_gamma)) throw Error(ErrorKind::InvalidConfig, "gmkl rbf_gamma must be positive");
  if (max_outer == 0 || max_smo_passes == 0) {
    throw Error(ErrorKind::InvalidConfig, "gmkl iteration limits must be positive");
  }
  if (!positive(tol_kkt) || tol_kkt >= 1.0 || !positive(tol_c) || tol_c >= 1.0) {
    throw Error(ErrorKind::InvalidConfig, "gmkl tolerances must lie in (0, 1)");
  }
  if (!positive(c_step)) throw Error(ErrorKind::InvalidConfig, "gmkl c_step must be positive");
}

KernelTrainResult train_kernels(const KernelMatrix& k1, const KernelMatrix& k2,
                                std::span<const int> labels, const GmklConfig& cfg) {
  cfg.validate();
  SmoOptions smo;
  smo.C = cfg.C;
  smo.tol_kkt = cfg.tol_kkt;
  smo.max_passes = cfg.max_smo_passes;

  KernelTrainResult result;
  result.c = {0.5, 0.5};
  result.dual = solve_dual(combine(result.c, k1, k2), labels, smo);
  double f = objective_f(result.c, result.dual.objective);
  result.history.push_back({result.c, f, result.dual.objective});

  constexpr int kMaxHalvings = 40;
  // F is flat near its minimum, so equal values can differ by round-off.
  constexpr double kRoundoff = 1e-12;
  bool settled = false;
  // Halved whenever c reverses direction, which damps oscillation around the
  // minimum where F alone cannot tell iterates apart.
  double base_step = cfg.c_step;
  double last_move = 0.0;
  for (std::size_t outer = 0; outer < cfg.max_outer; ++outer) {
    const Weights grad = gradient_j(k1, k2, labels, result.dual.alpha);
    double step = base_step;
    bool accepted = false;
    Weights next{};
    DualSolution next_dual;
    double next_f = 0.0;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      next = update_c(result.c, grad, step);
      if (std::max(std::abs(next[0] - result.c[0]), std::abs(next[1] - result.c[1])) < cfg.tol_c * 1e-3) {
        break;
      }
      next_dual = solve_dual(combine(next, k1, k2), labels, smo);
      next_f = objective_f(next, next_dual.objective);
      if (next_f <= f + kRoundoff * std::max(1.0, std::abs(f))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      settled = true;
      break;
    }
    const double moved = std::max(std::abs(next[0] - result.c[0]), std::abs(next[1] - result.c[1]));
    const double move = next[0] - result.c[0];
    if (move * last_move < 0.0) base_step *= 0.5;
    last_move = move;
    result.c = next;
    result.dual = std::move(next_dual);
    f = next_f;
    result.history.push_back({result.c, f, result.dual.objective});
    if (moved < cfg.tol_c) {
      settled = true;
      break;
    }
  }
  result.converged = settled && result.dual.converged;
  return result;
}

void TrainingSet::validate() const {
  const std::size_t n = labels.size();
  if (dk.size() != n || deep.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "training set feature and label counts differ");
  }
  if (n < 2) throw Error(ErrorKind::InsufficientSamples, "at least two training samples needed");
  bool pos = false;
  bool neg = false;
  for (const int y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw Error(ErrorKind::InvalidConfig, "labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorKind::SingleClass, "training set needs both classes");
  for (std::size_t i = 1; i < n; ++i) {
    if (dk[i].size() != dk[0].size() || deep[i].size() != deep[0].size()) {
      throw Error(ErrorKind::DimensionMismatch, "training vectors differ in length");
    }
  }
}

Preprocessing Preprocessing::fit(std::span<const std::vector<double>> dk) {
  Preprocessing p;
  if (dk.empty()) return p;
  const std::size_t dim = dk.front().size();
  const double count = static_cast<double>(dk.size());
  p.dk_mean.assign(dim, 0.0);
  p.dk_scale.assign(dim, 0.0);
  for (const auto& x : dk) {
    for (std::size_t k = 0; k < dim; ++k) p.dk_mean[k] += x[k];
  }
  for (auto& m : p.dk_mean) m /= count;
  std::vector<double> var(dim, 0.0);
  for (const auto& x : dk) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = x[k] - p.dk_mean[k];
      var[k] += d * d;
    }
  }
  const double dim_norm = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    const double sd = std::sqrt(var[k] / count);
    // Constant coordinates (the unit diagonal, for one) carry no information.
    p.dk_scale[k] = sd > 1e-12 ? dim_norm / sd : 0.0;
  }
  return p;
}

std::vector<double> Preprocessing::apply_dk(std::span<const double> x) const {
  if (x.size() != dk_mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "D-K vector has " + std::to_string(x.size()) +
                                                  " values, model expects " +
                                                  std::to_string(dk_mean.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - dk_mean[k]) * dk_scale[k];
  return out;
}

std::vector<double> Preprocessing::apply_deep(std::span<const double> y) {
  const double norm = std::sqrt(simd::active_kernels().dot(y.data(), y.data(), y.size()));
  std::vector<double> out(y.begin(), y.end());
  if (norm > 0.0) {
    for (auto& v : out) v /= norm;
  }
  return out;
}

GmklModel train(const TrainingSet& data, const GmklConfig& cfg) {
  data.validate();
  cfg.validate();
  GmklModel model;
  model.prep = Preprocessing::fit(data.dk);
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ys;
  xs.reserve(data.size());
  ys.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    xs.push_back(model.prep.apply_dk(data.dk[i]));
    ys.push_back(Preprocessing::apply_deep(data.deep[i]));
  }
  const auto k1 = rbf_gram(xs, cfg.rbf_gamma);
  const auto k2 = linear_gram(ys);
  auto fit = train_kernels(k1, k2, data.labels, cfg);

  model.c = fit.c;
  model.b = fit.dual.b;
  model.rbf_gamma = cfg.rbf_gamma;
  model.dk_dim = data.dk.front().size();
  model.deep_dim = data.deep.front().size();
  model.training_size = data.size();
  model.outer_iterations = fit.history.size() - 1;
  model.converged = fit.converged;
  model.config = cfg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (fit.dual.alpha[i] > 0.0) {
      model.support.push_back(i);
      model.alpha.push_back(fit.dual.alpha[i]);
      model.labels.push_back(data.labels[i]);
      model.support_dk.push_back(std::move(xs[i]));
      model.support_deep.push_back(std::move(ys[i]));
    }
  }
  return model;
}

double decision_preprocessed(const GmklModel& model, std::span<const double> dk,
                             std::span<const double> deep) {
  if (dk.size() != model.dk_dim || deep.size() != model.deep_dim) {
    throw Error(ErrorKind::DimensionMismatch, "probe dimensions do not match the model");
  }
  const auto& kernels = simd::active_kernels();
  const std::size_t m = model.support.size();
  std::vector<double> k1(m);
  for (std::size_t s = 0; s < m; ++s) {
    k1[s] = kernels.squared_distance(model.support_dk[s].data(), dk.data(), dk.size());
  }
  kernels.neg_scaled_exp(k1.data(), k1.data(), m, model.rbf_gamma);
  double f = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    double k = model.c[0] * k1[s];
    if (model.c[1] != 0.0) {
      k += model.c[1] * kernels.dot(model.support_deep[s].data(), deep.data(), deep.size());
    }
    f += model.alpha[s] * model.labels[s] * k;
  }
  return f + model.b;
}

double decision(const GmklModel& model, std::span<const double> dk, std::span<const double> deep) {
  if (deep.size() != model.deep_dim) {
    throw Error(ErrorKind::DimensionMismatch, "deep vector has " + std::to_string(deep.size()) +
                                                  " values, model expects " +
                                                  std::to_string(model.deep_dim));
  }
  const auto x = model.prep.apply_dk(dk);
  const auto y = Preprocessing::apply_deep(deep);
  return decision_preprocessed(model, x, y);
}

}  // namespace livediff::gmkl
