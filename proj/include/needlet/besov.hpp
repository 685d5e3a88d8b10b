#pragma once

#include "needlet/estimator.hpp"
#include "needlet/frame.hpp"

#include <span>
#include <string>

namespace needlet {

enum class TestFunctionId { F1, F2, F3 };

[[nodiscard]] std::string to_string(TestFunctionId id);
[[nodiscard]] TestFunctionId test_function_from_string(const std::string& name);

/// F1 = 1/(4 pi); F2 = cos(4x); F3 = (exp(-(x - 3pi/2)^2) + 2 exp(-(x - 2)^2)) sin(-2x).
[[nodiscard]] double test_function(TestFunctionId id, double x);

/// The test function as a field on the circle.
[[nodiscard]] Field test_field(TestFunctionId id);

/// M = max |F| over 2^14 equispaced angles.
[[nodiscard]] double test_function_sup(TestFunctionId id);

/// Besov parameters; p and q may be +infinity.
struct BesovParams {
  double s{1.0};
  double p{2.0};
  double q{2.0};
  double B{2.0};
  int d{1};
};

/// || B^{j(s + d(1/2 - 1/p))} ||beta_{j,.}||_{l_p} ||_{l_q} over the levels present.
[[nodiscard]] double besov_sequence_norm(const CoefficientSet& coeffs, const BesovParams& params);

/// Theta_j(p) = sum_k |beta_{j,k}|^p.
[[nodiscard]] double theta_true(const CoefficientSet& coeffs, int j, double p);

/**
 * Besov embedding between l_p and l_r on one level of K coefficients, p < r:
 *   ||beta||_p <= K^{1/p - 1/r} ||beta||_r   and   ||beta||_r <= ||beta||_p.
 * `homogeneous` holds these norm forms (relative slack 1e-12 for rounding);
 * `literal_*` evaluate the unnormalized power-sum statements
 *   sum |beta|^p <= K^{1 - p/r} sum |beta|^r   and   sum |beta|^r <= sum |beta|^p,
 * which only hold on suitably scaled vectors.
 */
struct EmbeddingCheck {
  bool lower{false};
  bool upper{false};
  bool literal_lower{false};
  bool literal_upper{false};

  [[nodiscard]] bool homogeneous() const noexcept { return lower && upper; }
};

[[nodiscard]] EmbeddingCheck besov_embedding_check(std::span<const double> beta, double p, double r);

/// Uniform grid on the circle (grid_size points) or, on the sphere,
/// grid_size / 2 Gauss-Legendre colatitudes times grid_size longitudes.
[[nodiscard]] Quadrature risk_grid(int d, std::size_t grid_size);

/// ||g - f||_p^p on risk_grid (sup over the grid for infinite p).
/// Requires grid_size >= 256.
[[nodiscard]] double lp_distance(const NeedletFrame& frame, const CoefficientSet& coeffs, const Field& truth,
                                 double p, std::size_t grid_size = 4096);

[[nodiscard]] double lp_risk(const Estimate& estimate, const Field& truth, double p, std::size_t grid_size = 4096);

/// Weighted sum of |estimate - truth|^p over precomputed grid values (max for infinite p).
[[nodiscard]] double lp_risk_values(std::span<const double> estimate, std::span<const double> truth,
                                    std::span<const double> weights, double p);

}  // namespace needlet
