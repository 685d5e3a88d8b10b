#pragma once

#include "needlet/special_fns.hpp"
#include "needlet/window.hpp"

#include <json.hpp>

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace needlet {

/// Unit vector in R^{d+1}; the circle uses the first two components.
struct Point {
  std::array<double, 3> v{1.0, 0.0, 0.0};

  [[nodiscard]] static Point on_circle(double theta);
  /// Colatitude in [0, pi], longitude in [0, 2 pi).
  [[nodiscard]] static Point on_sphere(double colatitude, double longitude);

  /// Polar angle of a circle point, in [0, 2 pi).
  [[nodiscard]] double angle() const;
  [[nodiscard]] double norm() const;
};

[[nodiscard]] double dot(const Point& a, const Point& b);

/// Great-circle distance; inner products overshooting +-1 are clamped.
[[nodiscard]] double geodesic_distance(const Point& a, const Point& b);

using Field = std::function<double(const Point&)>;

/// Dense row-major matrix; rows index evaluation points, columns needlet centers.
class LevelMatrix {
 public:
  LevelMatrix() = default;
  LevelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
  [[nodiscard]] double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

/// One resolution level: the band Lambda_j with its window weights and the
/// cubature points (needlet centers) with their weights.
struct FrameLevel {
  int j{0};
  int first_frequency{1};          // smallest ell in Lambda_j
  std::vector<double> window;      // b(ell / B^j) for consecutive ell from first_frequency
  std::vector<Point> centers;      // xi_{j,k}
  std::vector<double> weights;     // lambda_{j,k}
  int exact_degree{0};             // cubature integrates degree <= this exactly

  [[nodiscard]] std::size_t size() const noexcept { return centers.size(); }
  [[nodiscard]] int last_frequency() const noexcept {
    return first_frequency + static_cast<int>(window.size()) - 1;
  }
};

enum class CoefficientKind { exact, empirical };

/// Needlet coefficients beta_{j,k} for levels 0..max_level() plus the
/// coefficient of the normalized constant 1 / sqrt(omega_d).
struct CoefficientSet {
  CoefficientKind kind{CoefficientKind::exact};
  double mean_term{0.0};
  std::vector<std::vector<double>> levels;

  [[nodiscard]] int max_level() const noexcept { return static_cast<int>(levels.size()) - 1; }
};

/// CSV with header `j,k,value`; k is 0-based, the mean term is written as j = -1.
void write_coefficients_csv(std::ostream& out, const CoefficientSet& coeffs);

struct FrameOptions {
  /// Resource cap on the number of centers at the finest level.
  std::size_t max_centers{1u << 22};
};

class FftPlans;

/**
 * Needlet frame on S^1 or S^2.
 *
 *   psi_{j,k}(x) = sqrt(lambda_{j,k}) sum_{ell in Lambda_j} b(ell / B^j) P_{ell,d}(x, xi_{j,k}),
 *   Lambda_j = integers ell with B^{j-1} < ell < B^{j+1}
 *
 * (for integer B this is the open interval (floor(B^{j-1}), floor(B^{j+1}))).
 *
 * Level j carries a cubature exact to degree 2 floor(B^{j+1}): equispaced
 * angles on the circle, Gauss-Legendre colatitudes times equispaced
 * longitudes on the sphere. The constant ell = 0 is outside every band and is
 * carried separately as the mean term.
 *
 * Immutable after build; all member functions are safe to call concurrently.
 */
class NeedletFrame {
 public:
  [[nodiscard]] int dimension() const noexcept { return kernel_.d; }
  [[nodiscard]] double scale() const noexcept { return window_.scale(); }
  [[nodiscard]] int max_level() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  [[nodiscard]] const WindowFunction& window() const noexcept { return window_; }
  [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
  [[nodiscard]] const FrameLevel& level(int j) const;
  /// Highest frequency touched by levels 0..J.
  [[nodiscard]] int band_limit(int J) const;

  /// psi_{j,k}(x); std::out_of_range for bad indices.
  [[nodiscard]] double needlet(int j, std::size_t k, const Point& x) const;

  /// Matrix of psi_{j,k}(x_i), rows i, columns k. On the circle the rows are
  /// produced by a real inverse FFT of length K_j.
  [[nodiscard]] LevelMatrix evaluate_level(int j, std::span<const Point> xs) const;

  /// Coefficient of the normalized constant function.
  [[nodiscard]] double constant_value() const noexcept;

 private:
  friend NeedletFrame build_frame(int d, double B, int j_max, const WindowFunction& window,
                                  const FrameOptions& options);
  friend struct TrigSeries circle_series(const NeedletFrame& frame, const CoefficientSet& coeffs);

  KernelSpec kernel_{};
  WindowFunction window_;
  std::vector<FrameLevel> levels_;
  std::shared_ptr<const FftPlans> plans_;
};

/// Requires d in {1, 2}, j_max >= 0 and window.scale() == B. Throws
/// std::length_error when K_{j_max} exceeds options.max_centers.
[[nodiscard]] NeedletFrame build_frame(int d, double B, int j_max, const WindowFunction& window,
                                       const FrameOptions& options = {});

/// Consecutive frequencies of Lambda_j; empty when the band holds no integer.
[[nodiscard]] std::vector<int> band_frequencies(double B, int j);

[[nodiscard]] inline double needlet_eval(const NeedletFrame& frame, int j, std::size_t k, const Point& x) {
  return frame.needlet(j, k, x);
}

/// Quadrature rule on S^d exact for polynomials of degree <= `degree`.
struct Quadrature {
  std::vector<Point> points;
  std::vector<double> weights;
};
[[nodiscard]] Quadrature exact_quadrature(int d, int degree);

/// Needlet coefficients of f for levels 0..J by a shared quadrature exact to
/// degree max(2 floor(B^{J+1}), min_degree).
[[nodiscard]] CoefficientSet analyze(const NeedletFrame& frame, const Field& f, int J, int min_degree = 0);

/// mean_term / sqrt(omega_d) + sum_{j,k} beta_{j,k} psi_{j,k}(x) by direct needlet sums.
[[nodiscard]] double synthesize(const NeedletFrame& frame, const CoefficientSet& coeffs, const Point& x);

/// Batched synthesis. On the circle the coefficients are first folded into
/// trigonometric coefficients, so the cost is O(K + L * |xs|).
[[nodiscard]] std::vector<double> synthesize(const NeedletFrame& frame, const CoefficientSet& coeffs,
                                             std::span<const Point> xs);

/// constant + Re sum_{ell >= 1} coeffs[ell] e^{i ell theta}; coeffs[0] is unused.
struct TrigSeries {
  double constant{0.0};
  std::vector<std::complex<double>> coeffs;

  [[nodiscard]] double operator()(double theta) const;
};

/// Fold circle needlet coefficients into a trigonometric series (d == 1 only).
[[nodiscard]] TrigSeries circle_series(const NeedletFrame& frame, const CoefficientSet& coeffs);

/// Human-readable frame descriptor: d, B, j_max, window parameters, per-level K_j.
[[nodiscard]] nlohmann::json frame_descriptor(const NeedletFrame& frame);

}  // namespace needlet
