#include "needlet/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace needlet {

namespace {

void require_even_order(int p, std::size_t n) {
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("U-statistic order must be even and >= 2, got " + std::to_string(p));
  if (static_cast<std::size_t>(p) > n) {
    throw std::invalid_argument("U-statistic order " + std::to_string(p) + " exceeds sample size " +
                                std::to_string(n));
  }
}

std::size_t common_length(const std::vector<std::vector<double>>& per_center) {
  if (per_center.empty()) return 0;
  const std::size_t n = per_center.front().size();
  for (const auto& c : per_center) {
    if (c.size() != n) throw std::invalid_argument("U-statistic: centers have different sample counts");
  }
  return n;
}

// e_p from power sums pw[1..p].
double newton_elementary(const std::vector<double>& pw, int p) {
  std::vector<double> e(p + 1, 0.0);
  e[0] = 1.0;
  for (int m = 1; m <= p; ++m) {
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
      const double term = e[m - i] * pw[i];
      acc += (i % 2 == 1) ? term : -term;
    }
    e[m] = acc / m;
  }
  return e[p];
}

void check_interpolation_order(double p) {
  if (!std::isfinite(p) || p <= 2.0) {
    throw std::invalid_argument("interpolated statistic needs a finite order p > 2");
  }
  if (std::floor(p) == p && static_cast<long long>(p) % 2 == 0) {
    throw std::invalid_argument("order " + std::to_string(p) + " is even; use ustat_theta");
  }
}

double interpolate(double low, double high, double p) {
  const double p0 = 2.0 * std::floor(p / 2.0);
  const double delta = (p0 + 2.0 - p) / 2.0;
  low = std::max(low, 0.0);
  high = std::max(high, 0.0);
  if (low == 0.0 || high == 0.0) return 0.0;
  return std::pow(low, delta) * std::pow(high, 1.0 - delta);
}

std::string format_order(double p) { return std::isinf(p) ? "inf" : std::to_string(p); }

}  // namespace

Dataset make_dataset(int d, std::vector<Point> x, std::vector<double> y, double noise_sd) {
  if (d != 1 && d != 2) throw std::invalid_argument("dataset: d must be 1 or 2");
  if (x.size() != y.size()) {
    throw std::invalid_argument("dataset: " + std::to_string(x.size()) + " locations but " +
                                std::to_string(y.size()) + " responses");
  }
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("dataset: noise_sd must be >= 0");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i].norm() - 1.0) > 1e-12 || (d == 1 && x[i].v[2] != 0.0)) {
      throw std::invalid_argument("dataset: location " + std::to_string(i) + " is not on the sphere");
    }
    if (!std::isfinite(y[i])) throw std::invalid_argument("dataset: response " + std::to_string(i) + " is not finite");
  }
  return Dataset{d, std::move(x), std::move(y), noise_sd};
}

int truncation_level(std::size_t n, double B, int d) {
  if (n < 2) throw std::invalid_argument("truncation_level: n must be >= 2");
  if (!(B > 1.0) || d < 1) throw std::invalid_argument("truncation_level: need B > 1 and d >= 1");
  const double level = std::log(static_cast<double>(n)) / (d * std::log(B));
  return static_cast<int>(std::floor(level + 1e-9));
}

EmpiricalCoefficients empirical_coefficients(const NeedletFrame& frame, const Dataset& data, int J) {
  if (data.n() == 0) throw std::invalid_argument("empirical_coefficients: empty dataset");
  if (data.d != frame.dimension()) throw std::invalid_argument("empirical_coefficients: dimension mismatch");
  if (J < 0 || J > frame.max_level()) {
    throw std::out_of_range("empirical_coefficients: level " + std::to_string(J) + " not in frame");
  }
  const double omega = frame.kernel().omega;
  const double n = static_cast<double>(data.n());

  EmpiricalCoefficients out;
  out.n = data.n();
  out.coeffs.kind = CoefficientKind::empirical;
  double ysum = 0.0;
  for (double y : data.y) ysum += y;
  out.coeffs.mean_term = std::sqrt(omega) * ysum / n;

  out.coeffs.levels.resize(J + 1);
  out.z.reserve(J + 1);
  for (int j = 0; j <= J; ++j) {
    LevelMatrix z = frame.evaluate_level(j, data.x);
    auto& beta = out.coeffs.levels[j];
    beta.assign(z.cols(), 0.0);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      const double s = omega * data.y[i];
      auto row = z.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] *= s;
        beta[k] += row[k];
      }
    }
    for (double& b : beta) b /= n;
    out.z.push_back(std::move(z));
  }
  return out;
}

double elementary_symmetric(std::span<const double> z, int p) {
  if (p < 0) throw std::invalid_argument("elementary_symmetric: negative degree");
  if (p == 0) return 1.0;
  if (static_cast<std::size_t>(p) > z.size()) return 0.0;
  std::vector<double> pw(p + 1, 0.0);
  for (double v : z) {
    double t = 1.0;
    for (int i = 1; i <= p; ++i) {
      t *= v;
      pw[i] += t;
    }
  }
  return newton_elementary(pw, p);
}

double binomial(std::size_t n, int p) {
  if (p < 0 || static_cast<std::size_t>(p) > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= p; ++i) r = r * static_cast<double>(n - p + i) / i;
  return r;
}

double ustat_theta(const LevelMatrix& z, int p) {
  const std::size_t n = z.rows();
  require_even_order(p, n);
  const std::size_t K = z.cols();
  // Column power sums, accumulated row by row to stay cache friendly.
  std::vector<double> pw(K * p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = z.row(i);
    for (std::size_t k = 0; k < K; ++k) {
      double t = 1.0;
      double* acc = pw.data() + k * p;
      for (int m = 0; m < p; ++m) {
        t *= row[k];
        acc[m] += t;
      }
    }
  }
  std::vector<double> sums(p + 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    std::copy(pw.begin() + k * p, pw.begin() + (k + 1) * p, sums.begin() + 1);
    total += newton_elementary(sums, p);
  }
  return total / binomial(n, p);
}

double ustat_theta(const std::vector<std::vector<double>>& per_center, int p) {
  const std::size_t n = common_length(per_center);
  require_even_order(p, n);
  double total = 0.0;
  for (const auto& c : per_center) total += elementary_symmetric(c, p);
  return total / binomial(n, p);
}

double ustat_theta_bruteforce(const std::vector<std::vector<double>>& per_center, int p, double cap) {
  const std::size_t n = common_length(per_center);
  require_even_order(p, n);
  const double count = binomial(n, p);
  if (count > cap) {
    throw std::length_error("ustat_theta_bruteforce: " + std::to_string(count) + " subsets exceed the cap");
  }
  double total = 0.0;
  std::vector<std::size_t> idx(p);
  for (const auto& c : per_center) {
    for (int m = 0; m < p; ++m) idx[m] = m;
    while (true) {
      double prod = 1.0;
      for (std::size_t i : idx) prod *= c[i];
      total += prod;
      int m = p - 1;
      while (m >= 0 && idx[m] == n - p + m) --m;
      if (m < 0) break;
      ++idx[m];
      for (int r = m + 1; r < p; ++r) idx[r] = idx[r - 1] + 1;
    }
  }
  return total / count;
}

std::uint64_t count_subsets(std::size_t n, int p, double cap) {
  if (p < 0 || static_cast<std::size_t>(p) > n) return 0;
  if (binomial(n, p) > cap) throw std::length_error("count_subsets: enumeration exceeds the cap");
  if (p == 0) return 1;
  std::vector<std::size_t> idx(p);
  for (int m = 0; m < p; ++m) idx[m] = m;
  std::uint64_t count = 0;
  while (true) {
    ++count;
    int m = p - 1;
    while (m >= 0 && idx[m] == n - p + m) --m;
    if (m < 0) break;
    ++idx[m];
    for (int r = m + 1; r < p; ++r) idx[r] = idx[r - 1] + 1;
  }
  return count;
}

double ustat_theta_interpolated(const LevelMatrix& z, double p) {
  check_interpolation_order(p);
  const int p0 = 2 * static_cast<int>(std::floor(p / 2.0));
  return interpolate(ustat_theta(z, p0), ustat_theta(z, p0 + 2), p);
}

double ustat_theta_interpolated(const std::vector<std::vector<double>>& per_center, double p) {
  check_interpolation_order(p);
  const int p0 = 2 * static_cast<int>(std::floor(p / 2.0));
  return interpolate(ustat_theta(per_center, p0), ustat_theta(per_center, p0 + 2), p);
}

double theta_infty(const CoefficientSet& coeffs, int j) {
  if (j < 0 || j > coeffs.max_level()) throw std::out_of_range("theta_infty: level not present");
  double s = 0.0;
  for (double b : coeffs.levels[j]) s += std::abs(b);
  return s;
}

bool ThresholdReport::is_sup_rule() const noexcept { return std::isinf(p); }

std::vector<int> ThresholdReport::selected() const {
  std::vector<int> out;
  for (const auto& l : levels) {
    if (l.tau) out.push_back(l.j);
  }
  return out;
}

nlohmann::json ThresholdReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) {
    lv.push_back({{"j", l.j}, {"statistic", l.statistic}, {"threshold", l.threshold}, {"tau", l.tau ? 1 : 0}});
  }
  return {{"p", is_sup_rule() ? nlohmann::json("inf") : nlohmann::json(p)},
          {"J_n", J},
          {"n", n},
          {"B", B},
          {"d", d},
          {"levels", lv}};
}

ThresholdReport ThresholdReport::from_json(const nlohmann::json& j) {
  ThresholdReport r;
  const auto& p = j.at("p");
  r.p = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
  r.J = j.at("J_n").get<int>();
  r.n = j.at("n").get<std::size_t>();
  r.B = j.at("B").get<double>();
  r.d = j.at("d").get<int>();
  for (const auto& l : j.at("levels")) {
    r.levels.push_back({l.at("j").get<int>(), l.at("statistic").get<double>(), l.at("threshold").get<double>(),
                        l.at("tau").get<int>() != 0});
  }
  return r;
}

double threshold_value(std::size_t n, double B, int d, int j, double p) {
  const double omega = surface_measure(d);
  const double level = std::pow(B, d * j);
  const double nn = static_cast<double>(n);
  if (std::isinf(p)) return omega * level / std::sqrt(nn);
  return std::pow(omega, p) * level * std::pow(nn, -p / 2.0);
}

ThresholdReport threshold_levels(std::span<const double> stats, std::size_t n, double B, int d, double p) {
  if (n == 0) throw std::invalid_argument("threshold_levels: n must be positive");
  if (!(p > 0.0)) throw std::invalid_argument("threshold_levels: order must be positive, got " + format_order(p));
  ThresholdReport r;
  r.p = p;
  r.J = static_cast<int>(stats.size()) - 1;
  r.n = n;
  r.B = B;
  r.d = d;
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double t = threshold_value(n, B, d, static_cast<int>(j), p);
    r.levels.push_back({static_cast<int>(j), stats[j], t, stats[j] >= t});
  }
  return r;
}

double level_statistic(const EmpiricalCoefficients& emp, int j, double p) {
  if (j < 0 || j >= static_cast<int>(emp.z.size())) throw std::out_of_range("level_statistic: level not present");
  if (std::isinf(p)) return theta_infty(emp.coeffs, j);
  if (std::floor(p) == p && static_cast<long long>(p) % 2 == 0) return ustat_theta(emp.z[j], static_cast<int>(p));
  return ustat_theta_interpolated(emp.z[j], p);
}

double Estimate::operator()(const Point& x) const { return synthesize(*frame, retained, x); }

std::vector<double> Estimate::evaluate(std::span<const Point> xs) const { return synthesize(*frame, retained, xs); }

Estimate apply_thresholds(const NeedletFrame& frame, const EmpiricalCoefficients& emp, ThresholdReport report) {
  if (static_cast<int>(report.levels.size()) != emp.coeffs.max_level() + 1) {
    throw std::invalid_argument("apply_thresholds: report and coefficients cover different levels");
  }
  Estimate est;
  est.frame = &frame;
  est.empirical = emp.coeffs;
  est.retained = emp.coeffs;
  for (const auto& l : report.levels) {
    if (!l.tau) std::fill(est.retained.levels[l.j].begin(), est.retained.levels[l.j].end(), 0.0);
  }
  est.report = std::move(report);
  return est;
}

Estimate fit_global(const NeedletFrame& frame, const EmpiricalCoefficients& emp, double p) {
  std::vector<double> stats;
  for (int j = 0; j <= emp.coeffs.max_level(); ++j) stats.push_back(level_statistic(emp, j, p));
  auto report = threshold_levels(stats, emp.n, frame.scale(), frame.dimension(), p);
  return apply_thresholds(frame, emp, std::move(report));
}

Estimate fit_global(const NeedletFrame& frame, const Dataset& data, double p, std::optional<int> J) {
  const int level = J.value_or(truncation_level(data.n(), frame.scale(), frame.dimension()));
  return fit_global(frame, empirical_coefficients(frame, data, level), p);
}

Estimate fit_linear(const NeedletFrame& frame, const EmpiricalCoefficients& emp) {
  ThresholdReport report;
  report.p = 0.0;
  report.J = emp.coeffs.max_level();
  report.n = emp.n;
  report.B = frame.scale();
  report.d = frame.dimension();
  for (int j = 0; j <= report.J; ++j) report.levels.push_back({j, 0.0, 0.0, true});
  return apply_thresholds(frame, emp, std::move(report));
}

Estimate fit_linear(const NeedletFrame& frame, const Dataset& data, std::optional<int> J) {
  const int level = J.value_or(truncation_level(data.n(), frame.scale(), frame.dimension()));
  return fit_linear(frame, empirical_coefficients(frame, data, level));
}

void write_estimate_csv(std::ostream& out, const Estimate& est) {
  const auto old_precision = out.precision(17);
  out << "j,k,beta_hat,tau\n";
  out << -1 << ',' << 0 << ',' << est.empirical.mean_term << ",1\n";
  for (const auto& l : est.report.levels) {
    const auto& beta = est.empirical.levels[l.j];
    for (std::size_t k = 0; k < beta.size(); ++k) {
      out << l.j << ',' << k << ',' << beta[k] << ',' << (l.tau ? 1 : 0) << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace needlet
