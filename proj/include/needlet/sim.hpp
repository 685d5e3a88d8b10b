#pragma once

#include "needlet/besov.hpp"
#include "needlet/estimator.hpp"
#include "needlet/frame.hpp"
#include "needlet/window.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace needlet {

enum class NoiseFamily {
  gaussian,
  uniform_bounded,    // U(-sqrt(3) sigma, sqrt(3) sigma)
  rademacher_scaled,  // +-sigma with equal probability
};

[[nodiscard]] std::string to_string(NoiseFamily f);
[[nodiscard]] NoiseFamily noise_family_from_string(const std::string& name);

/// X_i uniform on S^d, Y_i = f(X_i) + eps_i with eps of standard deviation
/// `sigma`. Deterministic in `seed`.
[[nodiscard]] Dataset generate_dataset(const Field& f, int d, std::size_t n, double sigma, NoiseFamily family,
                                       std::uint64_t seed);
[[nodiscard]] Dataset generate_dataset(TestFunctionId f, std::size_t n, double sigma, NoiseFamily family,
                                       std::uint64_t seed);

/// Independent stream seed for replicate `replicate` of cell `cell`.
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t replicate);

struct ExperimentConfig {
  std::string name{"custom"};
  TestFunctionId test_function{TestFunctionId::F2};
  int d{1};
  double B{2.0};
  std::vector<std::size_t> n{64, 128, 256};
  double p{2.0};  // threshold order and loss exponent
  NoiseFamily noise{NoiseFamily::gaussian};
  std::vector<double> sigma_frac{0.25, 0.5, 0.75};  // sigma = frac * sup|F|
  int replicates{200};
  std::uint64_t seed{20240501};
  std::size_t grid_size{4096};
  WindowVariant window{WindowVariant::smooth_bump};
  std::string output;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Missing keys keep their defaults; std::invalid_argument on bad values.
  [[nodiscard]] static ExperimentConfig from_json(const nlohmann::json& j);
  void validate() const;
};

/// "example-4.1", "example-4.2", "example-4.3".
[[nodiscard]] ExperimentConfig preset(const std::string& name);
[[nodiscard]] std::vector<std::string> preset_names();

struct CellResult {
  std::size_t n{0};
  int J{0};
  double sigma_frac{0.0};
  double sigma{0.0};
  int replicates{0};
  double global_mean{0.0};
  double global_se{0.0};
  double linear_mean{0.0};
  double linear_se{0.0};
  std::map<std::string, int> selection_histogram;  // level set key -> count
  std::vector<int> level_counts;                   // replicates with tau_j = 1
  std::vector<double> mean_statistic;              // Monte Carlo mean of the level statistic
  std::vector<double> threshold;
  double wall_seconds{0.0};

  /// Most frequent level set; ties go to the smallest key.
  [[nodiscard]] std::string modal_selection() const;
  /// Share of replicates whose level set is exactly `key`.
  [[nodiscard]] double selection_share(const std::string& key) const;
};

/// ";"-joined levels, "none" when empty.
[[nodiscard]] std::string selection_key(const std::vector<int>& levels);

struct RiskReport {
  ExperimentConfig config;
  double sup_norm{0.0};
  std::vector<CellResult> cells;
  double wall_seconds{0.0};

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static RiskReport from_json(const nlohmann::json& j);
};

/// Thread count from NEEDLET_THREADS, else the hardware concurrency.
[[nodiscard]] unsigned worker_threads();

using CellCallback = std::function<void(const RiskReport& partial, const CellResult& cell)>;

/// Runs every (n, sigma) cell; `on_cell` is invoked after each cell completes.
[[nodiscard]] RiskReport run_experiment(const ExperimentConfig& config, const CellCallback& on_cell = {});

/// One row per cell with columns test_fn, n, J_n, sigma_frac, p, R,
/// global_mean, global_se, linear_mean, linear_se, levels_selected_mode.
void write_report_csv(std::ostream& out, const RiskReport& report);

}  // namespace needlet
