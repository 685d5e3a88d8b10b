#include "needlet/frame.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace needlet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The FFTW planner is not re-entrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// B^e snapped to the nearest integer when it is one up to rounding.
double snapped_power(double B, int e) {
  const double v = std::pow(B, e);
  const double r = std::round(v);
  return std::abs(v - r) <= 1e-9 * std::max(1.0, v) ? r : v;
}

// std::complex<double> is layout-compatible with fftw_complex.
fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

int cubature_degree(double B, int j) {
  return 2 * static_cast<int>(std::floor(snapped_power(B, j + 1)));
}

}  // namespace

// Real FFT plans per level: c2r for evaluation rows, r2c for folding
// coefficients back to frequencies.
class FftPlans {
 public:
  explicit FftPlans(const std::vector<FrameLevel>& levels) {
    std::lock_guard lock(planner_mutex());
    for (const auto& lev : levels) {
      const int K = static_cast<int>(lev.size());
      std::vector<double> real(K);
      std::vector<std::complex<double>> spec(K / 2 + 1);
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      c2r_.push_back(fftw_plan_dft_c2r_1d(K, as_fftw(spec.data()), real.data(), flags));
      r2c_.push_back(fftw_plan_dft_r2c_1d(K, real.data(), as_fftw(spec.data()), flags));
    }
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    for (auto p : c2r_) fftw_destroy_plan(p);
    for (auto p : r2c_) fftw_destroy_plan(p);
  }

  void inverse(int j, std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(c2r_[j], as_fftw(in), out);
  }
  void forward(int j, double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(r2c_[j], in, as_fftw(out));
  }

 private:
  std::vector<fftw_plan> c2r_;
  std::vector<fftw_plan> r2c_;
};

Point Point::on_circle(double theta) {
  Point p;
  p.v = {std::cos(theta), std::sin(theta), 0.0};
  return p;
}

Point Point::on_sphere(double colatitude, double longitude) {
  Point p;
  const double s = std::sin(colatitude);
  p.v = {s * std::cos(longitude), s * std::sin(longitude), std::cos(colatitude)};
  return p;
}

double Point::angle() const {
  const double a = std::atan2(v[1], v[0]);
  return a < 0.0 ? a + kTwoPi : a;
}

double Point::norm() const { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double dot(const Point& a, const Point& b) {
  return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}

double geodesic_distance(const Point& a, const Point& b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

std::vector<int> band_frequencies(double B, int j) {
  if (!(B > 1.0)) throw std::invalid_argument("band_frequencies: B must be > 1");
  if (j < 0) throw std::invalid_argument("band_frequencies: negative level");
  const int first = static_cast<int>(std::floor(snapped_power(B, j - 1))) + 1;
  const int last = static_cast<int>(std::ceil(snapped_power(B, j + 1))) - 1;
  std::vector<int> out;
  for (int l = std::max(first, 1); l <= last; ++l) out.push_back(l);
  return out;
}

Quadrature exact_quadrature(int d, int degree) {
  if (degree < 0) throw std::invalid_argument("exact_quadrature: negative degree");
  Quadrature q;
  if (d == 1) {
    const int M = degree + 1;
    q.points.reserve(M);
    for (int k = 0; k < M; ++k) q.points.push_back(Point::on_circle(kTwoPi * k / M));
    q.weights.assign(M, kTwoPi / M);
    return q;
  }
  if (d == 2) {
    const int lat = degree / 2 + 1;
    const int lon = degree + 1;
    const auto gl = gauss_legendre(lat);
    q.points.reserve(static_cast<std::size_t>(lat) * lon);
    for (int a = 0; a < lat; ++a) {
      const double colat = std::acos(gl.nodes[a]);
      for (int b = 0; b < lon; ++b) {
        q.points.push_back(Point::on_sphere(colat, kTwoPi * b / lon));
        q.weights.push_back(gl.weights[a] * kTwoPi / lon);
      }
    }
    return q;
  }
  throw std::invalid_argument("exact_quadrature: only d = 1, 2 are supported");
}

NeedletFrame build_frame(int d, double B, int j_max, const WindowFunction& window,
                         const FrameOptions& options) {
  if (d != 1 && d != 2) throw std::invalid_argument("build_frame: d must be 1 or 2");
  if (j_max < 0) throw std::invalid_argument("build_frame: j_max must be >= 0");
  if (std::abs(window.scale() - B) > 1e-12 * B) {
    throw std::invalid_argument("build_frame: window scale does not match B");
  }

  NeedletFrame frame;
  frame.kernel_ = make_kernel_spec(d);
  frame.window_ = window;

  const int top_degree = cubature_degree(B, j_max);
  const std::size_t top_size = d == 1 ? static_cast<std::size_t>(top_degree) + 1
                                      : static_cast<std::size_t>(top_degree / 2 + 1) * (top_degree + 1);
  if (top_size > options.max_centers) {
    throw std::length_error("build_frame: level " + std::to_string(j_max) + " needs " +
                            std::to_string(top_size) + " centers, cap is " +
                            std::to_string(options.max_centers));
  }

  const double scale = B;
  for (int j = 0; j <= j_max; ++j) {
    FrameLevel lev;
    lev.j = j;
    const auto freqs = band_frequencies(B, j);
    lev.first_frequency = freqs.empty() ? 1 : freqs.front();
    const double bj = snapped_power(scale, j);
    for (int l : freqs) lev.window.push_back(window(l / bj));
    lev.exact_degree = cubature_degree(B, j);
    auto q = exact_quadrature(d, lev.exact_degree);
    lev.centers = std::move(q.points);
    lev.weights = std::move(q.weights);
    frame.levels_.push_back(std::move(lev));
  }
  if (d == 1) frame.plans_ = std::make_shared<const FftPlans>(frame.levels_);
  return frame;
}

const FrameLevel& NeedletFrame::level(int j) const {
  if (j < 0 || j > max_level()) {
    throw std::out_of_range("needlet frame: level " + std::to_string(j) + " out of range");
  }
  return levels_[j];
}

int NeedletFrame::band_limit(int J) const {
  int top = 0;
  for (int j = 0; j <= std::min(J, max_level()); ++j) {
    if (!levels_[j].window.empty()) top = std::max(top, levels_[j].last_frequency());
  }
  return top;
}

double NeedletFrame::constant_value() const noexcept { return 1.0 / std::sqrt(kernel_.omega); }

double NeedletFrame::needlet(int j, std::size_t k, const Point& x) const {
  const auto& lev = level(j);
  if (k >= lev.size()) {
    throw std::out_of_range("needlet frame: index " + std::to_string(k) + " out of range at level " +
                            std::to_string(j));
  }
  const double t = std::clamp(dot(x, lev.centers[k]), -1.0, 1.0);
  return std::sqrt(lev.weights[k]) * projector_series(kernel_, lev.first_frequency, lev.window, t);
}

LevelMatrix NeedletFrame::evaluate_level(int j, std::span<const Point> xs) const {
  const auto& lev = level(j);
  const std::size_t K = lev.size();
  LevelMatrix out(xs.size(), K);
  if (lev.window.empty()) return out;

  if (kernel_.d == 1) {
    // Equal weights on the circle: psi_{j,k}(x) = sqrt(lambda)/pi * sum_l b_l cos(l (xi_k - x)).
    const double amp = std::sqrt(lev.weights.front()) / std::numbers::pi;
    std::vector<std::complex<double>> spec(K / 2 + 1);
    std::vector<double> real(K);
    const int first = lev.first_frequency;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::fill(spec.begin(), spec.end(), std::complex<double>{});
      const double x = xs[i].angle();
      const std::complex<double> rot = std::polar(1.0, -x);
      std::complex<double> z = std::polar(1.0, -first * x);
      for (std::size_t m = 0; m < lev.window.size(); ++m) {
        spec[first + m] = 0.5 * lev.window[m] * z;
        z *= rot;
      }
      plans_->inverse(j, spec.data(), real.data());
      auto row = out.row(i);
      for (std::size_t k = 0; k < K; ++k) row[k] = amp * real[k];
    }
    return out;
  }

  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto row = out.row(i);
    for (std::size_t k = 0; k < K; ++k) {
      const double t = std::clamp(dot(xs[i], lev.centers[k]), -1.0, 1.0);
      row[k] = std::sqrt(lev.weights[k]) * projector_series(kernel_, lev.first_frequency, lev.window, t);
    }
  }
  return out;
}

CoefficientSet analyze(const NeedletFrame& frame, const Field& f, int J, int min_degree) {
  if (J < 0 || J > frame.max_level()) throw std::out_of_range("analyze: level out of range");
  const int degree = std::max(cubature_degree(frame.scale(), J), min_degree);
  const auto q = exact_quadrature(frame.dimension(), degree);

  std::vector<double> wf(q.points.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    wf[i] = q.weights[i] * f(q.points[i]);
    mean += wf[i];
  }

  CoefficientSet out;
  out.kind = CoefficientKind::exact;
  out.mean_term = mean * frame.constant_value();
  out.levels.resize(J + 1);
  for (int j = 0; j <= J; ++j) {
    const auto psi = frame.evaluate_level(j, q.points);
    auto& beta = out.levels[j];
    beta.assign(psi.cols(), 0.0);
    for (std::size_t i = 0; i < psi.rows(); ++i) {
      const auto row = psi.row(i);
      for (std::size_t k = 0; k < beta.size(); ++k) beta[k] += wf[i] * row[k];
    }
  }
  return out;
}

namespace {

void check_indexing(const NeedletFrame& frame, const CoefficientSet& coeffs) {
  if (coeffs.max_level() > frame.max_level()) {
    throw std::invalid_argument("synthesize: coefficients exceed the frame's levels");
  }
  for (int j = 0; j <= coeffs.max_level(); ++j) {
    if (coeffs.levels[j].size() != frame.level(j).size()) {
      throw std::invalid_argument("synthesize: level " + std::to_string(j) + " has " +
                                  std::to_string(coeffs.levels[j].size()) + " coefficients, frame has " +
                                  std::to_string(frame.level(j).size()));
    }
  }
}

}  // namespace

double synthesize(const NeedletFrame& frame, const CoefficientSet& coeffs, const Point& x) {
  check_indexing(frame, coeffs);
  double sum = coeffs.mean_term * frame.constant_value();
  for (int j = 0; j <= coeffs.max_level(); ++j) {
    const auto& beta = coeffs.levels[j];
    for (std::size_t k = 0; k < beta.size(); ++k) {
      if (beta[k] != 0.0) sum += beta[k] * frame.needlet(j, k, x);
    }
  }
  return sum;
}

double TrigSeries::operator()(double theta) const {
  double sum = constant;
  if (coeffs.size() < 2) return sum;
  const std::complex<double> rot = std::polar(1.0, theta);
  std::complex<double> z = rot;
  for (std::size_t l = 1; l < coeffs.size(); ++l) {
    sum += coeffs[l].real() * z.real() - coeffs[l].imag() * z.imag();
    z *= rot;
  }
  return sum;
}

TrigSeries circle_series(const NeedletFrame& frame, const CoefficientSet& coeffs) {
  if (frame.dimension() != 1) throw std::invalid_argument("circle_series: frame is not on the circle");
  check_indexing(frame, coeffs);
  TrigSeries series;
  series.constant = coeffs.mean_term * frame.constant_value();
  series.coeffs.assign(static_cast<std::size_t>(frame.band_limit(coeffs.max_level())) + 1, {0.0, 0.0});

  std::vector<double> real;
  std::vector<std::complex<double>> spec;
  for (int j = 0; j <= coeffs.max_level(); ++j) {
    const auto& lev = frame.level(j);
    const auto& beta = coeffs.levels[j];
    if (lev.window.empty() || std::all_of(beta.begin(), beta.end(), [](double b) { return b == 0.0; })) {
      continue;
    }
    const std::size_t K = lev.size();
    real.assign(beta.begin(), beta.end());
    spec.assign(K / 2 + 1, {});
    // spec[l] = sum_k beta_k exp(-i l xi_k)
    frame.plans_->forward(j, real.data(), spec.data());
    const double amp = std::sqrt(lev.weights.front()) / std::numbers::pi;
    for (std::size_t m = 0; m < lev.window.size(); ++m) {
      const std::size_t l = lev.first_frequency + m;
      const double g = amp * lev.window[m];
      series.coeffs[l] += g * spec[l];
    }
  }
  return series;
}

std::vector<double> synthesize(const NeedletFrame& frame, const CoefficientSet& coeffs,
                               std::span<const Point> xs) {
  std::vector<double> out(xs.size());
  if (frame.dimension() == 1) {
    const auto series = circle_series(frame, coeffs);
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = series(xs[i].angle());
    return out;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = synthesize(frame, coeffs, xs[i]);
  return out;
}

void write_coefficients_csv(std::ostream& out, const CoefficientSet& coeffs) {
  const auto old_precision = out.precision(17);
  out << "j,k,value\n";
  out << -1 << ',' << 0 << ',' << coeffs.mean_term << '\n';
  for (int j = 0; j <= coeffs.max_level(); ++j) {
    for (std::size_t k = 0; k < coeffs.levels[j].size(); ++k) {
      out << j << ',' << k << ',' << coeffs.levels[j][k] << '\n';
    }
  }
  out.precision(old_precision);
}

nlohmann::json frame_descriptor(const NeedletFrame& frame) {
  nlohmann::json levels = nlohmann::json::array();
  for (int j = 0; j <= frame.max_level(); ++j) {
    const auto& lev = frame.level(j);
    levels.push_back({{"j", j},
                      {"K", lev.size()},
                      {"first_frequency", lev.first_frequency},
                      {"last_frequency", lev.last_frequency()},
                      {"exact_degree", lev.exact_degree}});
  }
  const auto& w = frame.window();
  return {{"d", frame.dimension()},
          {"B", frame.scale()},
          {"j_max", frame.max_level()},
          {"window",
           {{"variant", to_string(w.variant())},
            {"B", w.scale()},
            {"normalizer", w.normalizer()},
            {"smoothness", w.smoothness() == 0 ? nlohmann::json("infinity") : nlohmann::json(w.smoothness())},
            {"quadrature_nodes", w.quadrature_nodes()}}},
          {"levels", levels}};
}

}  // namespace needlet
