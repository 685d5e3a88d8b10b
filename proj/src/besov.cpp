#include "needlet/besov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace needlet {

namespace {

constexpr std::size_t kSupGrid = 1u << 14;
constexpr std::size_t kMinRiskGrid = 256;
constexpr double kRoundingSlack = 1e-12;

double lp_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

double power_sum(std::span<const double> v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return s;
}

}  // namespace

std::string to_string(TestFunctionId id) {
  switch (id) {
    case TestFunctionId::F1:
      return "F1";
    case TestFunctionId::F2:
      return "F2";
    case TestFunctionId::F3:
      return "F3";
  }
  return "unknown";
}

TestFunctionId test_function_from_string(const std::string& name) {
  if (name == "F1") return TestFunctionId::F1;
  if (name == "F2") return TestFunctionId::F2;
  if (name == "F3") return TestFunctionId::F3;
  throw std::invalid_argument("unknown test function '" + name + "'");
}

double test_function(TestFunctionId id, double x) {
  switch (id) {
    case TestFunctionId::F1:
      return 0.25 / std::numbers::pi;
    case TestFunctionId::F2:
      return std::cos(4.0 * x);
    case TestFunctionId::F3: {
      const double a = x - 1.5 * std::numbers::pi;
      const double b = x - 2.0;
      return (std::exp(-a * a) + 2.0 * std::exp(-b * b)) * std::sin(-2.0 * x);
    }
  }
  throw std::invalid_argument("unknown test function");
}

Field test_field(TestFunctionId id) {
  return [id](const Point& p) { return test_function(id, p.angle()); };
}

double test_function_sup(TestFunctionId id) {
  double m = 0.0;
  for (std::size_t i = 0; i < kSupGrid; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / kSupGrid;
    m = std::max(m, std::abs(test_function(id, x)));
  }
  return m;
}

double besov_sequence_norm(const CoefficientSet& coeffs, const BesovParams& params) {
  if (!(params.s > 0.0)) throw std::invalid_argument("besov: s must be > 0");
  if (!(params.p >= 1.0) || !(params.q >= 1.0)) throw std::invalid_argument("besov: p, q must be >= 1");
  if (!(params.B > 1.0)) throw std::invalid_argument("besov: B must be > 1");
  const double inv_p = std::isinf(params.p) ? 0.0 : 1.0 / params.p;
  const double exponent = params.s + params.d * (0.5 - inv_p);
  std::vector<double> weighted;
  for (int j = 0; j <= coeffs.max_level(); ++j) {
    weighted.push_back(std::pow(params.B, j * exponent) * lp_norm(coeffs.levels[j], params.p));
  }
  return lp_norm(weighted, params.q);
}

double theta_true(const CoefficientSet& coeffs, int j, double p) {
  if (j < 0 || j > coeffs.max_level()) throw std::out_of_range("theta_true: level not present");
  if (!(p > 0.0)) throw std::invalid_argument("theta_true: order must be positive");
  return power_sum(coeffs.levels[j], p);
}

EmbeddingCheck besov_embedding_check(std::span<const double> beta, double p, double r) {
  if (!(p >= 1.0) || !(r > p) || std::isinf(r)) {
    throw std::invalid_argument("besov_embedding_check: need 1 <= p < r < infinity");
  }
  const double K = static_cast<double>(beta.size());
  const double np = lp_norm(beta, p);
  const double nr = lp_norm(beta, r);
  const double sp = power_sum(beta, p);
  const double sr = power_sum(beta, r);
  EmbeddingCheck c;
  c.lower = np <= std::pow(K, 1.0 / p - 1.0 / r) * nr * (1.0 + kRoundingSlack);
  c.upper = nr <= np * (1.0 + kRoundingSlack);
  c.literal_lower = sp <= sr * std::pow(K, 1.0 - p / r) * (1.0 + kRoundingSlack);
  c.literal_upper = sr <= sp * (1.0 + kRoundingSlack);
  return c;
}

Quadrature risk_grid(int d, std::size_t grid_size) {
  if (grid_size < kMinRiskGrid) throw std::invalid_argument("risk grid needs at least 256 points");
  Quadrature q;
  const double two_pi = 2.0 * std::numbers::pi;
  if (d == 1) {
    for (std::size_t i = 0; i < grid_size; ++i) q.points.push_back(Point::on_circle(two_pi * i / grid_size));
    q.weights.assign(grid_size, two_pi / grid_size);
    return q;
  }
  if (d == 2) {
    const auto gl = gauss_legendre(static_cast<int>(grid_size / 2));
    for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
      const double colat = std::acos(gl.nodes[a]);
      for (std::size_t b = 0; b < grid_size; ++b) {
        q.points.push_back(Point::on_sphere(colat, two_pi * b / grid_size));
        q.weights.push_back(gl.weights[a] * two_pi / grid_size);
      }
    }
    return q;
  }
  throw std::invalid_argument("risk grid: d must be 1 or 2");
}

double lp_risk_values(std::span<const double> estimate, std::span<const double> truth,
                      std::span<const double> weights, double p) {
  if (estimate.size() != truth.size() || truth.size() != weights.size()) {
    throw std::invalid_argument("lp_risk_values: size mismatch");
  }
  if (!(p > 0.0)) throw std::invalid_argument("lp_risk_values: order must be positive");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) m = std::max(m, std::abs(estimate[i] - truth[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = std::abs(estimate[i] - truth[i]);
    s += weights[i] * (p == 2.0 ? e * e : std::pow(e, p));
  }
  return s;
}

double lp_distance(const NeedletFrame& frame, const CoefficientSet& coeffs, const Field& truth, double p,
                   std::size_t grid_size) {
  const auto grid = risk_grid(frame.dimension(), grid_size);
  const auto est = synthesize(frame, coeffs, grid.points);
  std::vector<double> tv(grid.points.size());
  for (std::size_t i = 0; i < tv.size(); ++i) tv[i] = truth(grid.points[i]);
  return lp_risk_values(est, tv, grid.weights, p);
}

double lp_risk(const Estimate& estimate, const Field& truth, double p, std::size_t grid_size) {
  if (estimate.frame == nullptr) throw std::invalid_argument("lp_risk: estimate has no frame");
  return lp_distance(*estimate.frame, estimate.retained, truth, p, grid_size);
}

}  // namespace needlet
