#include <algorithm>
#include <cmath>
#include <limits>

#include "livediff/error.hpp"
#include "livediff/gmkl.hpp"

namespace livediff::gmkl {

namespace {

void check_problem(const KernelMatrix& k, std::span<const int> labels) {
  if (k.values.size() != k.n * k.n || labels.size() != k.n) {
    throw Error(ErrorKind::DimensionMismatch, "kernel matrix and label count disagree");
  }
  bool pos = false;
  bool neg = false;
  for (const int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      throw Error(ErrorKind::InvalidConfig, "labels must be +1 or -1");
    }
  }
  if (!pos || !neg) throw Error(ErrorKind::SingleClass, "both classes are required");
}

}  // namespace

double dual_objective(const KernelMatrix& k, std::span<const int> labels,
                      std::span<const double> alpha) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < k.n; ++i) {
    if (alpha[i] == 0.0) continue;
    linear += alpha[i];
    double row = 0.0;
    for (std::size_t j = 0; j < k.n; ++j) row += alpha[j] * labels[j] * k(i, j);
    quad += alpha[i] * labels[i] * row;
  }
  return linear - 0.5 * quad;
}

DualSolution solve_dual(const KernelMatrix& k, std::span<const int> labels,
                        const SmoOptions& options) {
  check_problem(k, labels);
  const std::size_t n = k.n;
  const double c = options.C;
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidConfig, "box constraint C must be positive");
  constexpr double kTau = 1e-12;

  auto q = [&](std::size_t i, std::size_t j) { return labels[i] * labels[j] * k(i, j); };

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  auto& alpha = sol.alpha;
  // Gradient of 1/2 a'Qa - e'a.
  std::vector<double> grad(n, -1.0);

  auto in_up = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] > 0.0) || (labels[t] == -1 && alpha[t] < c);
  };

  const std::size_t max_iter = std::max<std::size_t>(options.max_passes, 1) * std::max<std::size_t>(n, 1);
  sol.converged = false;
  for (sol.iterations = 0; sol.iterations < max_iter; ++sol.iterations) {
    std::size_t i = n;
    std::size_t j = n;
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -labels[t] * grad[t];
      if (in_up(t) && v > up) {
        up = v;
        i = t;
      }
      if (in_low(t) && v < low) {
        low = v;
        j = t;
      }
    }
    if (i == n || j == n || up - low < options.tol_kkt) {
      sol.converged = true;
      break;
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (labels[i] != labels[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    if (options.on_step) options.on_step(alpha);
  }

  // Bias from free vectors; midpoint of the feasible interval otherwise.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= c) {
      if (labels[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double r = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  sol.b = -r;
  sol.objective = dual_objective(k, labels, alpha);
  return sol;
}

}  // namespace livediff::gmkl
