#include "needlet/frame.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

using namespace needlet;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

const WindowFunction& window2() {
  static const WindowFunction w = build_window(2.0);
  return w;
}

const NeedletFrame& circle_frame() {
  static const NeedletFrame f = build_frame(1, 2.0, 8, window2());
  return f;
}

std::vector<Point> circle_grid(std::size_t n) {
  std::vector<Point> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(Point::on_circle(2 * kPi * i / n));
  return xs;
}

// ||g||_p on a uniform circle grid, sup for infinite p.
double circle_norm(const std::vector<double>& v, double p) {
  const double h = 2 * kPi / v.size();
  if (std::isinf(p)) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0;
  for (double x : v) s += h * std::pow(std::abs(x), p);
  return std::pow(s, 1 / p);
}

double squared_norm(const CoefficientSet& c) {
  double s = c.mean_term * c.mean_term;
  for (const auto& l : c.levels) {
    for (double b : l) s += b * b;
  }
  return s;
}

}  // namespace

TEST_CASE("band frequencies") {
  CHECK(band_frequencies(2.0, 0) == std::vector<int>{1});
  CHECK(band_frequencies(2.0, 1) == std::vector<int>{2, 3});
  CHECK(band_frequencies(2.0, 2) == std::vector<int>{3, 4, 5, 6, 7});
  CHECK(band_frequencies(3.0, 1) == std::vector<int>{2, 3, 4, 5, 6, 7, 8});
  // non-integer scale: integers strictly inside (B^{j-1}, B^{j+1})
  CHECK(band_frequencies(1.5, 2) == std::vector<int>{2, 3});
  CHECK(band_frequencies(1.5, 4) == std::vector<int>{4, 5, 6, 7});
  CHECK_THROWS_AS((void)band_frequencies(1.0, 1), std::invalid_argument);
  // every frequency lives in some band and window values off the listed ones vanish
  const auto& w = window2();
  for (int j = 0; j <= 6; ++j) {
    for (int ell = 1; ell <= 512; ++ell) {
      const auto band = band_frequencies(2.0, j);
      const bool listed = std::find(band.begin(), band.end(), ell) != band.end();
      if (!listed) CHECK(w(ell / std::pow(2.0, j)) == 0.0);
    }
  }
}

TEST_CASE("circle levels: sizes and weights") {
  const auto& f = circle_frame();
  CHECK(f.dimension() == 1);
  CHECK(f.max_level() == 8);
  for (int j = 0; j <= 8; ++j) {
    const auto& lev = f.level(j);
    CHECK(lev.size() == std::size_t(2 * (1 << (j + 1)) + 1));
    CHECK(lev.exact_degree == 2 * (1 << (j + 1)));
    double s = 0;
    for (double w : lev.weights) s += w;
    CHECK(s == doctest::Approx(2 * kPi).epsilon(1e-12));
    const double ratio = lev.size() / std::pow(2.0, j);
    CHECK(ratio >= 4.0);
    CHECK(ratio <= 5.0);
  }
  CHECK(f.level(2).first_frequency == 3);
  CHECK(f.level(2).last_frequency() == 7);
  CHECK(f.band_limit(8) == 511);
  CHECK_THROWS_AS((void)f.level(9), std::out_of_range);
}

TEST_CASE("cubature exactness") {
  for (int deg : {0, 3, 16, 64}) {
    const auto q = exact_quadrature(1, deg);
    for (int m = 1; m <= deg; ++m) {
      double c = 0, s = 0;
      for (std::size_t i = 0; i < q.points.size(); ++i) {
        c += q.weights[i] * std::cos(m * q.points[i].angle());
        s += q.weights[i] * std::sin(m * q.points[i].angle());
      }
      CHECK(std::abs(c) <= 1e-10);
      CHECK(std::abs(s) <= 1e-10);
    }
  }
  // sphere: monomials x^a y^b z^c up to total degree 12
  const auto q = exact_quadrature(2, 12);
  double wsum = 0;
  for (double w : q.weights) wsum += w;
  CHECK(wsum == doctest::Approx(4 * kPi).epsilon(1e-12));
  auto dfact = [](int k) {
    double r = 1;
    for (int i = k; i > 1; i -= 2) r *= i;
    return r;
  };
  for (int a = 0; a <= 12; ++a) {
    for (int b = 0; a + b <= 12; ++b) {
      for (int c = 0; a + b + c <= 12; ++c) {
        double num = 0;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
          const auto& v = q.points[i].v;
          num += q.weights[i] * std::pow(v[0], a) * std::pow(v[1], b) * std::pow(v[2], c);
        }
        double exact = 0;
        if (a % 2 == 0 && b % 2 == 0 && c % 2 == 0) {
          exact = 4 * kPi * dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1);
        }
        CHECK(num == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("needlets integrate to zero and have unit-order norms") {
  const auto& f = circle_frame();
  const auto grid = circle_grid(4096);
  for (int j = 0; j <= 6; ++j) {
    const auto m = f.evaluate_level(j, grid);
    for (std::size_t k : {std::size_t{0}, m.cols() / 3, m.cols() - 1}) {
      double integral = 0, l2 = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        integral += m(i, k);
        l2 += m(i, k) * m(i, k);
      }
      integral *= 2 * kPi / grid.size();
      l2 = std::sqrt(l2 * 2 * kPi / grid.size());
      CHECK(std::abs(integral) <= 1e-12);
      CHECK(l2 == doctest::Approx(1.0).epsilon(0.3));
    }
  }
}

TEST_CASE("localization at the antipode") {
  const auto& f = circle_frame();
  const int j = 6;
  for (std::size_t k : {std::size_t{0}, std::size_t{17}, std::size_t{200}}) {
    const double th = f.level(j).centers[k].angle() + kPi;
    CHECK(std::abs(f.needlet(j, k, Point::on_circle(th))) <= 0.05 * std::pow(2.0, j / 2.0));
  }
}

TEST_CASE("fft rows agree with direct needlet sums") {
  const auto& f = circle_frame();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  std::vector<Point> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(Point::on_circle(u(rng)));
  for (int j : {0, 3, 7}) {
    const auto m = f.evaluate_level(j, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t k = 0; k < m.cols(); k += 7) CHECK(m(i, k) == doctest::Approx(f.needlet(j, k, xs[i])).epsilon(1e-10).scale(1.0));
    }
  }
  CHECK_THROWS_AS((void)f.needlet(2, 17, xs[0]), std::out_of_range);
  CHECK_NOTHROW((void)needlet_eval(f, 2, 16, xs[0]));
}

TEST_CASE("analysis examples") {
  const auto& f = circle_frame();
  const auto c1 = analyze(f, [](const Point&) { return 1 / (4 * kPi); }, 8);
  CHECK(c1.kind == CoefficientKind::exact);
  CHECK(c1.mean_term == doctest::Approx(std::sqrt(2 * kPi) / (4 * kPi)).epsilon(1e-13));
  for (const auto& l : c1.levels) {
    for (double b : l) CHECK(std::abs(b) <= 1e-14);
  }
  const auto c2 = analyze(f, [](const Point& p) { return std::cos(4 * p.angle()); }, 8);
  for (int j = 0; j <= 8; ++j) {
    double s = 0;
    for (double b : c2.levels[j]) s += b * b;
    if (j == 2) {
      CHECK(s == doctest::Approx(kPi).epsilon(1e-10));
    } else {
      CHECK(s <= 1e-20);
    }
  }
  const auto c0 = analyze(f, [](const Point&) { return 0.0; }, 4);
  CHECK(squared_norm(c0) == 0.0);
  CHECK_THROWS_AS((void)analyze(f, [](const Point&) { return 0.0; }, 9), std::out_of_range);
}

TEST_CASE("tight frame: parseval and reconstruction") {
  const auto& f = circle_frame();
  auto cos4 = [](const Point& p) { return std::cos(4 * p.angle()); };
  const auto c = analyze(f, cos4, 8);
  CHECK(squared_norm(c) == doctest::Approx(kPi).epsilon(1e-6));
  const auto grid = circle_grid(1000);
  const auto rec = synthesize(f, c, grid);
  double worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(rec[i] - cos4(grid[i])));
  CHECK(worst <= 1e-6);
  for (std::size_t i = 0; i < grid.size(); i += 97) CHECK(synthesize(f, c, grid[i]) == doctest::Approx(rec[i]).epsilon(1e-10).scale(1.0));

  // random trigonometric polynomial with frequencies up to B^J
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const int J = 6;
  std::vector<double> a(65), b(65);
  for (int m = 0; m <= 64; ++m) {
    a[m] = g(rng);
    b[m] = g(rng);
  }
  auto poly = [&](const Point& p) {
    double s = a[0];
    for (int m = 1; m <= 64; ++m) s += a[m] * std::cos(m * p.angle()) + b[m] * std::sin(m * p.angle());
    return s;
  };
  double norm2 = 2 * kPi * a[0] * a[0];
  for (int m = 1; m <= 64; ++m) norm2 += kPi * (a[m] * a[m] + b[m] * b[m]);
  const auto cp = analyze(f, poly, J);
  CHECK(squared_norm(cp) == doctest::Approx(norm2).epsilon(1e-6));
  const auto rp = synthesize(f, cp, grid);
  worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::abs(rp[i] - poly(grid[i])));
  CHECK(worst <= 1e-6);
}

TEST_CASE("truncated reconstruction of a smooth non band-limited function") {
  const auto& f = circle_frame();
  auto f3 = [](const Point& p) {
    const double x = p.angle();
    return (std::exp(-std::pow(x - 1.5 * kPi, 2)) + 2 * std::exp(-std::pow(x - 2, 2))) * std::sin(-2 * x);
  };
  const auto c = analyze(f, f3, 8, 2048);
  const auto grid = circle_grid(4096);
  const auto rec = synthesize(f, c, grid);
  double err = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) err += std::pow(rec[i] - f3(grid[i]), 2);
  err = std::sqrt(err * 2 * kPi / grid.size());
  MESSAGE("F3 truncated at J = 8, L2 reconstruction error " << err);
  CHECK(std::isfinite(err));
}

TEST_CASE("Lp norm scaling of single needlets") {
  const auto& f = circle_frame();
  const auto grid = circle_grid(1 << 14);
  for (double p : {1.0, 2.0, 4.0, kInf}) {
    for (int j = 0; j <= 8; ++j) {
      const auto m = f.evaluate_level(j, grid);
      std::vector<double> col(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) col[i] = m(i, 0);
      const double inv_p = std::isinf(p) ? 0.0 : 1 / p;
      const double scaled = circle_norm(col, p) * std::pow(2.0, -j * (0.5 - inv_p));
      CHECK(scaled >= 0.2);
      CHECK(scaled <= 5.0);
    }
  }
}

TEST_CASE("synthesis norm bound on random coefficients") {
  const auto& f = circle_frame();
  const auto grid = circle_grid(1 << 13);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int j = 1; j <= 7; ++j) {
    for (int trial = 0; trial < 5; ++trial) {
      CoefficientSet c;
      c.levels.assign(j + 1, {});
      for (int l = 0; l <= j; ++l) c.levels[l].assign(f.level(l).size(), 0.0);
      for (double& b : c.levels[j]) b = g(rng);
      const auto v = synthesize(f, c, grid);
      for (double p : {1.0, 2.0, 4.0, kInf}) {
        const double inv_p = std::isinf(p) ? 0.0 : 1 / p;
        double lp = 0;
        if (std::isinf(p)) {
          for (double b : c.levels[j]) lp = std::max(lp, std::abs(b));
        } else {
          for (double b : c.levels[j]) lp += std::pow(std::abs(b), p);
          lp = std::pow(lp, inv_p);
        }
        const double ratio = circle_norm(v, p) / (std::pow(2.0, j * (0.5 - inv_p)) * lp);
        worst = std::max(worst, ratio);
      }
    }
  }
  MESSAGE("largest synthesis norm ratio " << worst);
  CHECK(worst <= 5.0);
}

TEST_CASE("cross products decay with distance") {
  // With the sqrt(lambda) normalization the needlets have unit-order L2 norm,
  // so the kernel bound reads |<psi_{j,0}, psi_{j,k}>| <= C / (1 + B^j delta)^2
  // with one C for all j.
  const auto& f = circle_frame();
  const auto grid = circle_grid(4096);
  std::vector<double> fitted;
  for (int j = 1; j <= 6; ++j) {
    const auto m = f.evaluate_level(j, grid);
    const auto& lev = f.level(j);
    double c = 0;
    for (std::size_t k = 0; k < m.cols(); ++k) {
      double ip = 0;
      for (std::size_t i = 0; i < grid.size(); ++i) ip += m(i, 0) * m(i, k);
      ip *= 2 * kPi / grid.size();
      const double delta = geodesic_distance(lev.centers[0], lev.centers[k]);
      const double Bj = std::pow(2.0, j);
      c = std::max(c, std::abs(ip) * std::pow(1 + Bj * delta, 2));
    }
    fitted.push_back(c);
  }
  const auto [lo, hi] = std::minmax_element(fitted.begin(), fitted.end());
  MESSAGE("fitted cross-product constants range " << *lo << " .. " << *hi);
  CHECK(*hi <= 3.0 * *lo);
  CHECK(*hi <= 5.0);
}

TEST_CASE("sphere frame") {
  const auto f = build_frame(2, 2.0, 4, window2());
  CHECK(f.dimension() == 2);
  for (int j = 0; j <= 4; ++j) {
    const auto& lev = f.level(j);
    double s = 0;
    for (double w : lev.weights) s += w;
    CHECK(s == doctest::Approx(4 * kPi).epsilon(1e-12));
    const double ratio = lev.size() / std::pow(4.0, j);
    CHECK(ratio >= 6.0);
    CHECK(ratio <= 15.0);
  }
  auto g = [](const Point& p) { return p.v[0] * p.v[2] * p.v[2] - 0.5 * p.v[1] + 0.2 * p.v[0] * p.v[1]; };
  const auto c = analyze(f, g, 2);
  const auto q = exact_quadrature(2, 8);
  double norm2 = 0;
  for (std::size_t i = 0; i < q.points.size(); ++i) norm2 += q.weights[i] * g(q.points[i]) * g(q.points[i]);
  CHECK(squared_norm(c) == doctest::Approx(norm2).epsilon(1e-9));
  for (double th : {0.1, 1.0, 2.5}) {
    const Point x = Point::on_sphere(th, 2 * th);
    CHECK(synthesize(f, c, x) == doctest::Approx(g(x)).epsilon(1e-9).scale(1.0));
  }
  const auto m = f.evaluate_level(1, q.points);
  for (std::size_t k = 0; k < m.cols(); ++k) {
    double integral = 0;
    for (std::size_t i = 0; i < q.points.size(); ++i) integral += q.weights[i] * m(i, k);
    CHECK(std::abs(integral) <= 1e-12);
  }
  CHECK_THROWS_AS((void)circle_series(f, c), std::invalid_argument);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS((void)build_frame(3, 2.0, 2, window2()), std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(1, 2.0, -1, window2()), std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(1, 3.0, 2, window2()), std::invalid_argument);
  CHECK_THROWS_AS((void)build_frame(1, 2.0, 12, window2(), FrameOptions{1000}), std::length_error);
  CHECK_THROWS_AS((void)build_frame(2, 2.0, 12, window2()), std::length_error);
}

TEST_CASE("synthesis index checks and zero coefficients") {
  const auto& f = circle_frame();
  CoefficientSet zero;
  zero.levels.resize(3);
  for (int j = 0; j < 3; ++j) zero.levels[j].assign(f.level(j).size(), 0.0);
  CHECK(synthesize(f, zero, Point::on_circle(1.0)) == 0.0);
  for (double v : synthesize(f, zero, circle_grid(64))) CHECK(v == 0.0);
  auto bad = zero;
  bad.levels[1].pop_back();
  CHECK_THROWS_AS((void)synthesize(f, bad, Point::on_circle(1.0)), std::invalid_argument);
}

TEST_CASE("export formats") {
  const auto& f = circle_frame();
  const auto c = analyze(f, [](const Point& p) { return std::cos(4 * p.angle()); }, 1);
  std::ostringstream out;
  write_coefficients_csv(out, c);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "j,k,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1 + 5 + 9);
  const auto desc = frame_descriptor(f);
  CHECK(desc["d"] == 1);
  CHECK(desc["j_max"] == 8);
  CHECK(desc["levels"].size() == 9);
  CHECK(desc["levels"][3]["K"] == 33);
  CHECK(desc["window"]["variant"] == "smooth_bump");
}

TEST_CASE("concurrent evaluation is consistent") {
  const auto& f = circle_frame();
  const auto grid = circle_grid(300);
  const auto reference = f.evaluate_level(5, grid);
  std::vector<int> ok(4, 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      const auto m = f.evaluate_level(5, grid);
      ok[t] = std::equal(m.data().begin(), m.data().end(), reference.data().begin());
    });
  }
  for (auto& th : pool) th.join();
  for (int v : ok) CHECK(v == 1);
}
