#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace needlet {

enum class WindowVariant {
  smooth_bump,  // primitive of exp(-1/(1-t^2)), C-infinity
  bspline,      // cubic Bernstein smooth step, C^1
};

[[nodiscard]] std::string to_string(WindowVariant v);
[[nodiscard]] WindowVariant window_variant_from_string(const std::string& name);

/**
 * Needlet window b on (0, inf) with support (1/B, B) and
 * sum_j b^2(ell / B^j) = 1 for every integer ell >= 1.
 *
 * Built as b^2(u) = phi(u / B) - phi(u) from a monotone step phi that is 1 on
 * [0, 1/B], 0 beyond 1, and a rescaled smooth step psi in between. The
 * telescoping sum over j makes the partition of unity exact up to rounding.
 *
 * Immutable after construction; copies share the optional lookup table.
 */
class WindowFunction {
 public:
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] WindowVariant variant() const noexcept { return variant_; }
  /// Smoothness class rho; 0 encodes infinity.
  [[nodiscard]] int smoothness() const noexcept { return smoothness_; }
  /// Integral of the bump over [-1, 1] (1 for the Bernstein step).
  [[nodiscard]] double normalizer() const noexcept { return normalizer_; }
  [[nodiscard]] int quadrature_nodes() const noexcept { return static_cast<int>(gl_nodes_.size()); }
  [[nodiscard]] bool is_tabulated() const noexcept { return table_ != nullptr; }

  /// b(u); throws std::domain_error for u <= 0.
  [[nodiscard]] double operator()(double u) const;
  /// b(u)^2, computed without a square root round trip.
  [[nodiscard]] double squared(double u) const;

  /// Normalized smooth step psi on [-1, 1], psi(-1) = 0, psi(1) = 1.
  [[nodiscard]] double step(double u) const;

  /// Copy that evaluates by linear interpolation of `samples` equispaced values
  /// of b over [1/B, B].
  [[nodiscard]] WindowFunction tabulated(std::size_t samples) const;

 private:
  friend WindowFunction build_window(double B, WindowVariant variant, int quadrature_nodes);

  [[nodiscard]] double phi(double t) const;
  [[nodiscard]] double exact_squared(double u) const;

  double scale_{2.0};
  WindowVariant variant_{WindowVariant::smooth_bump};
  int smoothness_{0};
  double normalizer_{1.0};
  std::vector<double> gl_nodes_;
  std::vector<double> gl_weights_;
  std::shared_ptr<const std::vector<double>> table_;
  double table_step_{0.0};
};

/**
 * Build and self-check a window. Requires B > 1 and quadrature_nodes >= 64
 * (std::invalid_argument otherwise). The bump integral is computed once by
 * adaptive Simpson quadrature; partial integrals use Gauss-Legendre with
 * `quadrature_nodes` points. Throws std::runtime_error when the partition of
 * unity deviates by more than 1e-6 on ell <= 1024.
 */
[[nodiscard]] WindowFunction build_window(double B, WindowVariant variant = WindowVariant::smooth_bump,
                                          int quadrature_nodes = 128);

[[nodiscard]] inline double window_eval(const WindowFunction& w, double u) { return w(u); }

/// max over integer ell in [1, ell_max] of |sum_j b^2(ell / B^j) - 1|.
[[nodiscard]] double check_partition_of_unity(const WindowFunction& w, int ell_max);

/// Same check for an arbitrary weight supported on (1/B, B).
[[nodiscard]] double check_partition_of_unity(const std::function<double(double)>& b, double B,
                                              int ell_max);

}  // namespace needlet
