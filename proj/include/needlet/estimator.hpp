#pragma once

#include "needlet/frame.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace needlet {

/// Regression sample Y_i = f(X_i) + eps_i with X_i on S^d.
struct Dataset {
  int d{1};
  std::vector<Point> x;
  std::vector<double> y;
  double noise_sd{0.0};

  [[nodiscard]] std::size_t n() const noexcept { return y.size(); }
};

/// Validates sizes, d and unit norms (1e-12). std::invalid_argument on failure.
[[nodiscard]] Dataset make_dataset(int d, std::vector<Point> x, std::vector<double> y, double noise_sd = 0.0);

/// floor(log_B(n^{1/d})), robust to rounding at exact powers. Requires n >= 2.
[[nodiscard]] int truncation_level(std::size_t n, double B, int d);

/**
 * Empirical coefficients together with the per-observation products
 * Z_{i;j,k} = omega_d Y_i psi_{j,k}(X_i), so that beta_hat_{j,k} is the mean of
 * column k of z[j]. The omega_d factor makes beta_hat unbiased for the
 * coefficients of f under the uniform probability law of X.
 */
struct EmpiricalCoefficients {
  CoefficientSet coeffs;
  std::vector<LevelMatrix> z;
  std::size_t n{0};
};

[[nodiscard]] EmpiricalCoefficients empirical_coefficients(const NeedletFrame& frame, const Dataset& data, int J);

/// Elementary symmetric polynomial e_p(z) from power sums by Newton's identities.
[[nodiscard]] double elementary_symmetric(std::span<const double> z, int p);

/// binom(n, p) in floating point.
[[nodiscard]] double binomial(std::size_t n, int p);

/// sum_k e_p(Z_{.,k}) / binom(n, p) for a level matrix (rows i, columns k).
/// Requires p even and 2 <= p <= n (std::invalid_argument otherwise).
[[nodiscard]] double ustat_theta(const LevelMatrix& z, int p);
/// Same statistic from per-center value lists, all of equal length n.
[[nodiscard]] double ustat_theta(const std::vector<std::vector<double>>& per_center, int p);

/// Literal enumeration of all size-p index subsets. std::length_error when
/// binom(n, p) exceeds the cap.
[[nodiscard]] double ustat_theta_bruteforce(const std::vector<std::vector<double>>& per_center, int p,
                                            double cap = 1e7);

/// Number of size-p subsets of {0..n-1} visited by the brute-force enumerator.
[[nodiscard]] std::uint64_t count_subsets(std::size_t n, int p, double cap = 1e7);

/// Geometric interpolation max(T(p0), 0)^delta * max(T(p0 + 2), 0)^(1 - delta)
/// with p0 the largest even integer below p. Requires p > 2 and not even.
[[nodiscard]] double ustat_theta_interpolated(const LevelMatrix& z, double p);
[[nodiscard]] double ustat_theta_interpolated(const std::vector<std::vector<double>>& per_center, double p);

/// sum_k |beta_hat_{j,k}|.
[[nodiscard]] double theta_infty(const CoefficientSet& coeffs, int j);

struct LevelDecision {
  int j{0};
  double statistic{0.0};
  double threshold{0.0};
  bool tau{false};
};

/**
 * Keep-or-kill decision per level. The statistic is built on Z = omega_d Y psi,
 * so the threshold carries the matching factor:
 *   threshold_j = omega_d^p B^{dj} n^{-p/2},
 * and for the sup rule (p infinite) omega_d B^{dj} n^{-1/2}. The decisions are
 * the same as comparing the unscaled statistic with B^{dj} n^{-p/2}.
 */
struct ThresholdReport {
  double p{2.0};
  int J{0};
  std::size_t n{0};
  double B{2.0};
  int d{1};
  std::vector<LevelDecision> levels;

  [[nodiscard]] bool is_sup_rule() const noexcept;
  [[nodiscard]] std::vector<int> selected() const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static ThresholdReport from_json(const nlohmann::json& j);
};

[[nodiscard]] double threshold_value(std::size_t n, double B, int d, int j, double p);

/// stats[j] is the level-j statistic; p may be +infinity for the sup rule.
[[nodiscard]] ThresholdReport threshold_levels(std::span<const double> stats, std::size_t n, double B, int d,
                                               double p);

/// Statistic of order p at level j: even p uses ustat_theta, other finite
/// p > 2 the interpolated form, infinite p theta_infty.
[[nodiscard]] double level_statistic(const EmpiricalCoefficients& emp, int j, double p);

struct Estimate {
  const NeedletFrame* frame{nullptr};
  CoefficientSet empirical;
  CoefficientSet retained;  // tau-masked levels, mean term kept
  ThresholdReport report;

  [[nodiscard]] double operator()(const Point& x) const;
  [[nodiscard]] std::vector<double> evaluate(std::span<const Point> xs) const;
};

/// Mask the empirical coefficients with the decisions of `report`.
[[nodiscard]] Estimate apply_thresholds(const NeedletFrame& frame, const EmpiricalCoefficients& emp,
                                        ThresholdReport report);

/// Global thresholding estimator; J defaults to truncation_level(n, B, d).
[[nodiscard]] Estimate fit_global(const NeedletFrame& frame, const Dataset& data, double p,
                                  std::optional<int> J = std::nullopt);
[[nodiscard]] Estimate fit_global(const NeedletFrame& frame, const EmpiricalCoefficients& emp, double p);

/// Linear estimator: every level up to J retained.
[[nodiscard]] Estimate fit_linear(const NeedletFrame& frame, const Dataset& data,
                                  std::optional<int> J = std::nullopt);
[[nodiscard]] Estimate fit_linear(const NeedletFrame& frame, const EmpiricalCoefficients& emp);

/// CSV with header `j,k,beta_hat,tau`; the mean term is row j = -1 with tau 1.
void write_estimate_csv(std::ostream& out, const Estimate& est);

}  // namespace needlet
