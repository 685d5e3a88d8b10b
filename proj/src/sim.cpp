#include "needlet/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace needlet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + carry_; }

 private:
  double sum_{0.0};
  double carry_{0.0};
};

struct MeanSe {
  double mean{0.0};
  double se{0.0};
};

MeanSe mean_and_se(const std::vector<double>& v) {
  if (v.empty()) return {};
  CompensatedSum s;
  for (double x : v) s.add(x);
  const double mean = s.value() / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  CompensatedSum ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  const double sd = std::sqrt(ss.value() / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

struct ReplicateOutcome {
  double global_loss{0.0};
  double linear_loss{0.0};
  std::vector<int> selected;
  std::vector<double> statistic;
};

nlohmann::json order_to_json(double p) { return std::isinf(p) ? nlohmann::json("inf") : nlohmann::json(p); }

double order_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("order must be a number or \"inf\"");
  }
  return j.get<double>();
}

// Runs fn(r) for r in [0, count) on `threads` workers; rethrows the first failure.
void parallel_for(int count, unsigned threads, const std::function<void(int)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1))));
  if (threads == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int r = next++; r < count; r = next++) {
        try {
          fn(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian:
      return "gaussian";
    case NoiseFamily::uniform_bounded:
      return "uniform_bounded";
    case NoiseFamily::rademacher_scaled:
      return "rademacher_scaled";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform_bounded") return NoiseFamily::uniform_bounded;
  if (name == "rademacher_scaled") return NoiseFamily::rademacher_scaled;
  throw std::invalid_argument("unknown noise family '" + name + "'");
}

Dataset generate_dataset(const Field& f, int d, std::size_t n, double sigma, NoiseFamily family,
                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_dataset: sigma must be >= 0");
  if (d != 1 && d != 2) throw std::invalid_argument("generate_dataset: d must be 1 or 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  Dataset data;
  data.d = d;
  data.noise_sd = sigma;
  data.x.reserve(n);
  data.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point x;
    if (d == 1) {
      x = Point::on_circle(two_pi * unit(rng));
    } else {
      const double z = 2.0 * unit(rng) - 1.0;
      x = Point::on_sphere(std::acos(z), two_pi * unit(rng));
    }
    double eps = 0.0;
    switch (family) {
      case NoiseFamily::gaussian:
        eps = normal(rng);
        break;
      case NoiseFamily::uniform_bounded:
        eps = std::sqrt(3.0) * (2.0 * unit(rng) - 1.0);
        break;
      case NoiseFamily::rademacher_scaled:
        eps = unit(rng) < 0.5 ? -1.0 : 1.0;
        break;
    }
    data.y.push_back(f(x) + sigma * eps);
    data.x.push_back(x);
  }
  return data;
}

Dataset generate_dataset(TestFunctionId f, std::size_t n, double sigma, NoiseFamily family, std::uint64_t seed) {
  return generate_dataset(test_field(f), 1, n, sigma, family, seed);
}

std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t replicate) {
  return splitmix64(splitmix64(splitmix64(base) ^ cell) ^ replicate);
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"name", name},
          {"test_function", needlet::to_string(test_function)},
          {"d", d},
          {"B", B},
          {"n", n},
          {"p", order_to_json(p)},
          {"noise", needlet::to_string(noise)},
          {"sigma_frac", sigma_frac},
          {"replicates", replicates},
          {"seed", seed},
          {"grid_size", grid_size},
          {"window", needlet::to_string(window)},
          {"output", output}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("test_function")) c.test_function = test_function_from_string(j["test_function"].get<std::string>());
    if (j.contains("d")) c.d = j["d"].get<int>();
    if (j.contains("B")) c.B = j["B"].get<double>();
    if (j.contains("n")) {
      c.n = j["n"].is_array() ? j["n"].get<std::vector<std::size_t>>()
                              : std::vector<std::size_t>{j["n"].get<std::size_t>()};
    }
    if (j.contains("p")) c.p = order_from_json(j["p"]);
    if (j.contains("noise")) c.noise = noise_family_from_string(j["noise"].get<std::string>());
    if (j.contains("sigma_frac")) {
      c.sigma_frac = j["sigma_frac"].is_array() ? j["sigma_frac"].get<std::vector<double>>()
                                                : std::vector<double>{j["sigma_frac"].get<double>()};
    }
    if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("grid_size")) c.grid_size = j["grid_size"].get<std::size_t>();
    if (j.contains("window")) c.window = window_variant_from_string(j["window"].get<std::string>());
    if (j.contains("output")) c.output = j["output"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (d != 1) {
    if (d != 2) throw std::invalid_argument("config: d must be 1 or 2");
    if (test_function != TestFunctionId::F1) throw std::invalid_argument("config: F2 and F3 live on the circle");
  }
  if (!(B > 1.0)) throw std::invalid_argument("config: B must be > 1");
  if (n.empty()) throw std::invalid_argument("config: no sample sizes");
  for (auto v : n) {
    if (v < 2) throw std::invalid_argument("config: sample sizes must be >= 2");
  }
  if (!(p >= 2.0)) throw std::invalid_argument("config: p must be >= 2");
  if (sigma_frac.empty()) throw std::invalid_argument("config: no noise levels");
  for (double s : sigma_frac) {
    if (!(s >= 0.0)) throw std::invalid_argument("config: sigma_frac must be >= 0");
  }
  if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (grid_size < 256) throw std::invalid_argument("config: grid_size must be >= 256");
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "example-4.1") {
    c.test_function = TestFunctionId::F1;
  } else if (name == "example-4.2") {
    c.test_function = TestFunctionId::F2;
  } else if (name == "example-4.3") {
    c.test_function = TestFunctionId::F3;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"example-4.1", "example-4.2", "example-4.3"}; }

std::string selection_key(const std::vector<int>& levels) {
  if (levels.empty()) return "none";
  std::string key;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i) key += ';';
    key += std::to_string(levels[i]);
  }
  return key;
}

std::string CellResult::modal_selection() const {
  std::string best = "none";
  int count = -1;
  for (const auto& [key, c] : selection_histogram) {
    if (c > count) {
      best = key;
      count = c;
    }
  }
  return best;
}

double CellResult::selection_share(const std::string& key) const {
  if (replicates == 0) return 0.0;
  const auto it = selection_histogram.find(key);
  return it == selection_histogram.end() ? 0.0 : static_cast<double>(it->second) / replicates;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("NEEDLET_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(std::string("NEEDLET_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RiskReport run_experiment(const ExperimentConfig& config, const CellCallback& on_cell) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  RiskReport report;
  report.config = config;
  const Field truth = config.d == 1 ? test_field(config.test_function)
                                    : Field([](const Point&) { return test_function(TestFunctionId::F1, 0.0); });
  report.sup_norm = test_function_sup(config.test_function);

  int j_top = 0;
  for (auto n : config.n) j_top = std::max(j_top, truncation_level(n, config.B, config.d));
  const auto window = build_window(config.B, config.window);
  const auto frame = build_frame(config.d, config.B, j_top, window);

  const auto grid = risk_grid(config.d, config.grid_size);
  std::vector<double> truth_values(grid.points.size());
  for (std::size_t i = 0; i < truth_values.size(); ++i) truth_values[i] = truth(grid.points[i]);

  const unsigned threads = worker_threads();
  std::uint64_t cell_index = 0;
  for (auto n : config.n) {
    const int J = truncation_level(n, config.B, config.d);
    for (double frac : config.sigma_frac) {
      const auto cell_started = std::chrono::steady_clock::now();
      const double sigma = frac * report.sup_norm;
      const int R = config.replicates;
      std::vector<ReplicateOutcome> outcomes(R);
      const std::uint64_t this_cell = cell_index++;

      parallel_for(R, threads, [&](int r) {
        const auto seed = replicate_seed(config.seed, this_cell, static_cast<std::uint64_t>(r));
        const auto data = generate_dataset(truth, config.d, n, sigma, config.noise, seed);
        const auto emp = empirical_coefficients(frame, data, J);
        const auto global = fit_global(frame, emp, config.p);
        const auto linear = fit_linear(frame, emp);
        auto& out = outcomes[r];
        out.global_loss = lp_risk_values(global.evaluate(grid.points), truth_values, grid.weights, config.p);
        out.linear_loss = lp_risk_values(linear.evaluate(grid.points), truth_values, grid.weights, config.p);
        out.selected = global.report.selected();
        for (const auto& l : global.report.levels) out.statistic.push_back(l.statistic);
      });

      CellResult cell;
      cell.n = n;
      cell.J = J;
      cell.sigma_frac = frac;
      cell.sigma = sigma;
      cell.replicates = R;
      std::vector<double> g;
      std::vector<double> l;
      cell.level_counts.assign(J + 1, 0);
      std::vector<CompensatedSum> stat_sums(J + 1);
      for (const auto& o : outcomes) {
        g.push_back(o.global_loss);
        l.push_back(o.linear_loss);
        ++cell.selection_histogram[selection_key(o.selected)];
        for (int j : o.selected) ++cell.level_counts[j];
        for (int j = 0; j <= J; ++j) stat_sums[j].add(o.statistic[j]);
      }
      const auto gs = mean_and_se(g);
      const auto ls = mean_and_se(l);
      cell.global_mean = gs.mean;
      cell.global_se = gs.se;
      cell.linear_mean = ls.mean;
      cell.linear_se = ls.se;
      for (int j = 0; j <= J; ++j) {
        cell.mean_statistic.push_back(stat_sums[j].value() / R);
        cell.threshold.push_back(threshold_value(n, config.B, config.d, j, config.p));
      }
      cell.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_started).count();
      report.cells.push_back(std::move(cell));
      report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      if (on_cell) on_cell(report, report.cells.back());
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

nlohmann::json RiskReport::to_json() const {
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : cells) {
    cj.push_back({{"n", c.n},
                  {"J_n", c.J},
                  {"sigma_frac", c.sigma_frac},
                  {"sigma", c.sigma},
                  {"R", c.replicates},
                  {"global_mean", c.global_mean},
                  {"global_se", c.global_se},
                  {"linear_mean", c.linear_mean},
                  {"linear_se", c.linear_se},
                  {"selection_histogram", c.selection_histogram},
                  {"level_counts", c.level_counts},
                  {"mean_statistic", c.mean_statistic},
                  {"threshold", c.threshold},
                  {"levels_selected_mode", c.modal_selection()},
                  {"wall_seconds", c.wall_seconds}});
  }
  return {{"config", config.to_json()},
          {"seed", config.seed},
          {"sup_norm", sup_norm},
          {"cells", cj},
          {"wall_seconds", wall_seconds}};
}

RiskReport RiskReport::from_json(const nlohmann::json& j) {
  RiskReport r;
  try {
    r.config = ExperimentConfig::from_json(j.at("config"));
    r.sup_norm = j.at("sup_norm").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      cell.n = c.at("n").get<std::size_t>();
      cell.J = c.at("J_n").get<int>();
      cell.sigma_frac = c.at("sigma_frac").get<double>();
      cell.sigma = c.at("sigma").get<double>();
      cell.replicates = c.at("R").get<int>();
      cell.global_mean = c.at("global_mean").get<double>();
      cell.global_se = c.at("global_se").get<double>();
      cell.linear_mean = c.at("linear_mean").get<double>();
      cell.linear_se = c.at("linear_se").get<double>();
      cell.selection_histogram = c.at("selection_histogram").get<std::map<std::string, int>>();
      cell.level_counts = c.at("level_counts").get<std::vector<int>>();
      cell.mean_statistic = c.at("mean_statistic").get<std::vector<double>>();
      cell.threshold = c.at("threshold").get<std::vector<double>>();
      cell.wall_seconds = c.at("wall_seconds").get<double>();
      r.cells.push_back(std::move(cell));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("risk report: ") + e.what());
  }
  return r;
}

void write_report_csv(std::ostream& out, const RiskReport& report) {
  const auto old_precision = out.precision(10);
  out << "test_fn,n,J_n,sigma_frac,p,R,global_mean,global_se,linear_mean,linear_se,levels_selected_mode\n";
  const std::string p = std::isinf(report.config.p) ? "inf" : nlohmann::json(report.config.p).dump();
  for (const auto& c : report.cells) {
    out << to_string(report.config.test_function) << ',' << c.n << ',' << c.J << ',' << c.sigma_frac << ',' << p
        << ',' << c.replicates << ',' << c.global_mean << ',' << c.global_se << ',' << c.linear_mean << ','
        << c.linear_se << ',' << c.modal_selection() << '\n';
  }
  out.precision(old_precision);
}

}  // namespace needlet
