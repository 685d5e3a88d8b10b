#include "needlet/window.hpp"

#include "needlet/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace needlet {

namespace {

constexpr double kSimpsonTolerance = 1e-10;
constexpr double kPartitionTolerance = 1e-6;
constexpr int kSelfCheckEllMax = 1024;

double bump(double t) {
  const double a = 1.0 - t * t;
  return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

double simpson_step(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Plain recursive adaptive Simpson with Richardson correction.
double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = bump(lm);
  const double frm = bump(rm);
  const double left = simpson_step(fa, flm, fm, a, m);
  const double right = simpson_step(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double bump_integral() {
  const double fa = bump(-1.0);
  const double fm = bump(0.0);
  const double fb = bump(1.0);
  // Split at 0 so the first Simpson estimate is not degenerate.
  const double left_whole = simpson_step(fa, bump(-0.5), fm, -1.0, 0.0);
  const double right_whole = simpson_step(fm, bump(0.5), fb, 0.0, 1.0);
  return adaptive_simpson(-1.0, 0.0, fa, bump(-0.5), fm, left_whole, 0.5 * kSimpsonTolerance, 50) +
         adaptive_simpson(0.0, 1.0, fm, bump(0.5), fb, right_whole, 0.5 * kSimpsonTolerance, 50);
}

double sum_partition(const std::function<double(double)>& b2, double B, int ell) {
  double sum = 0.0;
  double u = static_cast<double>(ell);
  // Only j with ell / B^j in (1/B, B) contribute.
  while (u > 1.0 / B) {
    if (u < B) sum += b2(u);
    u /= B;
  }
  return sum;
}

double partition_error(const std::function<double(double)>& b2, double B, int ell_max) {
  double worst = 0.0;
  for (int ell = 1; ell <= ell_max; ++ell) {
    worst = std::max(worst, std::abs(sum_partition(b2, B, ell) - 1.0));
  }
  return worst;
}

}  // namespace

std::string to_string(WindowVariant v) {
  switch (v) {
    case WindowVariant::smooth_bump:
      return "smooth_bump";
    case WindowVariant::bspline:
      return "bspline";
  }
  return "unknown";
}

WindowVariant window_variant_from_string(const std::string& name) {
  if (name == "smooth_bump") return WindowVariant::smooth_bump;
  if (name == "bspline") return WindowVariant::bspline;
  throw std::invalid_argument("unknown window variant '" + name + "'");
}

double WindowFunction::step(double u) const {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  if (variant_ == WindowVariant::bspline) {
    const double s = 0.5 * (u + 1.0);
    return s * s * (3.0 - 2.0 * s);
  }
  // Integrate from the nearer endpoint; the bump is even.
  const double x = -std::abs(u);
  const double half = 0.5 * (x + 1.0);
  double partial = 0.0;
  for (std::size_t i = 0; i < gl_nodes_.size(); ++i) {
    partial += gl_weights_[i] * bump(-1.0 + half * (gl_nodes_[i] + 1.0));
  }
  partial *= half / normalizer_;
  return u <= 0.0 ? partial : 1.0 - partial;
}

double WindowFunction::phi(double t) const {
  const double inv = 1.0 / scale_;
  if (t <= inv) return 1.0;
  if (t >= 1.0) return 0.0;
  return step(1.0 - (2.0 * scale_ / (scale_ - 1.0)) * (t - inv));
}

double WindowFunction::exact_squared(double u) const {
  if (u <= 1.0 / scale_ || u >= scale_) return 0.0;
  return std::max(0.0, phi(u / scale_) - phi(u));
}

double WindowFunction::squared(double u) const {
  if (!(u > 0.0)) throw std::domain_error("window: argument must be > 0");
  if (table_) {
    const double b = (*this)(u);
    return b * b;
  }
  return exact_squared(u);
}

double WindowFunction::operator()(double u) const {
  if (!(u > 0.0)) throw std::domain_error("window: argument must be > 0");
  const double lo = 1.0 / scale_;
  if (u <= lo || u >= scale_) return 0.0;
  if (table_) {
    const auto& tab = *table_;
    const double pos = (u - lo) / table_step_;
    const auto i = std::min(static_cast<std::size_t>(pos), tab.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return tab[i] + frac * (tab[i + 1] - tab[i]);
  }
  return std::sqrt(exact_squared(u));
}

WindowFunction WindowFunction::tabulated(std::size_t samples) const {
  if (samples < 2) throw std::invalid_argument("window: tabulation needs >= 2 samples");
  WindowFunction copy = *this;
  copy.table_.reset();
  const double lo = 1.0 / scale_;
  copy.table_step_ = (scale_ - lo) / static_cast<double>(samples - 1);
  std::vector<double> values(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    values[i] = std::sqrt(copy.exact_squared(lo + copy.table_step_ * static_cast<double>(i)));
  }
  copy.table_ = std::make_shared<const std::vector<double>>(std::move(values));
  return copy;
}

WindowFunction build_window(double B, WindowVariant variant, int quadrature_nodes) {
  if (!(B > 1.0)) throw std::invalid_argument("build_window: B must be > 1");
  if (quadrature_nodes < 64) throw std::invalid_argument("build_window: need >= 64 quadrature nodes");

  WindowFunction w;
  w.scale_ = B;
  w.variant_ = variant;
  const auto rule = gauss_legendre(quadrature_nodes);
  w.gl_nodes_ = rule.nodes;
  w.gl_weights_ = rule.weights;
  if (variant == WindowVariant::smooth_bump) {
    w.smoothness_ = 0;
    w.normalizer_ = bump_integral();
  } else {
    w.smoothness_ = 1;
    w.normalizer_ = 1.0;
  }

  const double err = check_partition_of_unity(w, kSelfCheckEllMax);
  if (!(err <= kPartitionTolerance)) {
    throw std::runtime_error("build_window: partition of unity violated by " + std::to_string(err));
  }
  return w;
}

double check_partition_of_unity(const WindowFunction& w, int ell_max) {
  return partition_error([&w](double u) { return w.squared(u); }, w.scale(), ell_max);
}

double check_partition_of_unity(const std::function<double(double)>& b, double B, int ell_max) {
  return partition_error([&b](double u) {
    const double v = b(u);
    return v * v;
  }, B, ell_max);
}

}  // namespace needlet
