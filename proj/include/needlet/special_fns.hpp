#pragma once

#include <span>
#include <vector>

namespace needlet {

/// Dimension-dependent constants of the zonal projector kernels on S^d.
struct KernelSpec {
  int d{1};
  double eta{0.0};    // Gegenbauer parameter (d - 1) / 2
  double omega{0.0};  // surface measure of S^d
};

/// Surface measure 2 pi^{(d+1)/2} / Gamma((d+1)/2).
[[nodiscard]] double surface_measure(int d);

/// Throws std::invalid_argument for d < 1.
[[nodiscard]] KernelSpec make_kernel_spec(int d);

/**
 * Gegenbauer polynomial C_ell^{(eta)}(t) by the three-term recurrence
 *
 *   C_0 = 1,  C_1 = 2 eta t,
 *   C_ell = [2 t (ell + eta - 1) C_{ell-1} - (ell + 2 eta - 2) C_{ell-2}] / ell.
 *
 * t is clamped to [-1, 1] when it overshoots by at most 1e-12. eta <= 0 is a
 * domain error: the circle goes through the Fourier special case in
 * projector_kernel instead of a Gegenbauer limit.
 */
[[nodiscard]] double gegenbauer_eval(double eta, int ell, double t);

/**
 * Reproducing kernel of the degree-ell harmonic space evaluated at two points
 * with inner product cos_angle:
 *
 *   d >= 2:  (ell + eta) / (eta omega) C_ell^{(eta)}(cos_angle)
 *   d == 1:  1 / (2 pi) for ell = 0, cos(ell theta) / pi otherwise.
 */
[[nodiscard]] double projector_kernel(const KernelSpec& spec, int ell, double cos_angle);

/// Sum_{m} coeffs[m] * projector_kernel(spec, first_ell + m, cos_angle) in one
/// recurrence pass; O(first_ell + coeffs.size()).
[[nodiscard]] double projector_series(const KernelSpec& spec, int first_ell,
                                      std::span<const double> coeffs, double cos_angle);

/// Clamp an inner product of unit vectors back into [-1, 1]; values further
/// than 1e-12 outside are a domain error.
[[nodiscard]] double clamp_cosine(double t);

struct GaussLegendreRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1] (exact to degree 2n - 1).
[[nodiscard]] GaussLegendreRule gauss_legendre(int n);

}  // namespace needlet
