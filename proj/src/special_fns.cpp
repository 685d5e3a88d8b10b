#include "needlet/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace needlet {

namespace {

constexpr double kCosineSlack = 1e-12;

}  // namespace

double surface_measure(int d) {
  if (d < 1) throw std::invalid_argument("surface_measure: dimension must be >= 1");
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

KernelSpec make_kernel_spec(int d) {
  return KernelSpec{d, 0.5 * (d - 1), surface_measure(d)};
}

double clamp_cosine(double t) {
  if (std::isnan(t) || std::abs(t) > 1.0 + kCosineSlack) {
    throw std::domain_error("cosine " + std::to_string(t) + " outside [-1, 1]");
  }
  return std::clamp(t, -1.0, 1.0);
}

double gegenbauer_eval(double eta, int ell, double t) {
  if (!(eta > 0.0)) throw std::domain_error("gegenbauer_eval: eta must be > 0");
  if (ell < 0) throw std::domain_error("gegenbauer_eval: negative degree");
  t = clamp_cosine(t);
  if (ell == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * eta * t;
  for (int l = 2; l <= ell; ++l) {
    const double next = (2.0 * t * (l + eta - 1.0) * cur - (l + 2.0 * eta - 2.0) * prev) / l;
    prev = cur;
    cur = next;
  }
  return cur;
}

double projector_kernel(const KernelSpec& spec, int ell, double cos_angle) {
  if (ell < 0) throw std::domain_error("projector_kernel: negative degree");
  if (spec.d == 1) {
    const double t = clamp_cosine(cos_angle);
    if (ell == 0) return 0.5 / std::numbers::pi;
    return std::cos(ell * std::acos(t)) / std::numbers::pi;
  }
  return (ell + spec.eta) / (spec.eta * spec.omega) * gegenbauer_eval(spec.eta, ell, cos_angle);
}

double projector_series(const KernelSpec& spec, int first_ell, std::span<const double> coeffs,
                        double cos_angle) {
  if (first_ell < 0) throw std::domain_error("projector_series: negative degree");
  if (coeffs.empty()) return 0.0;
  const double t = clamp_cosine(cos_angle);
  const int last = first_ell + static_cast<int>(coeffs.size()) - 1;
  double sum = 0.0;

  if (spec.d == 1) {
    // Chebyshev recurrence: cos(l theta) = T_l(t).
    double prev = 1.0;
    double cur = t;
    for (int l = 0; l <= last; ++l) {
      double value;
      if (l == 0) {
        value = 1.0;
      } else if (l == 1) {
        value = t;
      } else {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
        value = cur;
      }
      if (l >= first_ell) {
        const double norm = (l == 0) ? 0.5 : 1.0;
        sum += coeffs[l - first_ell] * norm * value;
      }
    }
    return sum / std::numbers::pi;
  }

  const double eta = spec.eta;
  double prev = 1.0;
  double cur = 2.0 * eta * t;
  for (int l = 0; l <= last; ++l) {
    double value;
    if (l == 0) {
      value = 1.0;
    } else if (l == 1) {
      value = cur;
    } else {
      const double next = (2.0 * t * (l + eta - 1.0) * cur - (l + 2.0 * eta - 2.0) * prev) / l;
      prev = cur;
      cur = next;
      value = cur;
    }
    if (l >= first_ell) sum += coeffs[l - first_ell] * (l + eta) * value;
  }
  return sum / (eta * spec.omega);
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace needlet
