// Command-line front end: window checks, single fits and Monte Carlo runs.

#include "needlet/besov.hpp"
#include "needlet/estimator.hpp"
#include "needlet/sim.hpp"
#include "needlet/window.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace needlet;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

// Columns x,y (angle on the circle) or colatitude,longitude,y (sphere).
Dataset read_data_csv(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int cy = column("y");
  const int cx = column("x");
  const int cth = column("colatitude");
  const int cph = column("longitude");
  if (cy < 0) throw std::runtime_error(path + ": missing column y");
  if (d == 1 && cx < 0) throw std::runtime_error(path + ": missing column x");
  if (d == 2 && (cth < 0 || cph < 0)) throw std::runtime_error(path + ": need columns colatitude, longitude");

  std::vector<Point> xs;
  std::vector<double> ys;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    try {
      ys.push_back(std::stod(cells.at(cy)));
      xs.push_back(d == 1 ? Point::on_circle(std::stod(cells.at(cx)))
                          : Point::on_sphere(std::stod(cells.at(cth)), std::stod(cells.at(cph))));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  return make_dataset(d, std::move(xs), std::move(ys));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

int cmd_window_check(double B, int ell_max, const std::string& variant) {
  const auto w = build_window(B, window_variant_from_string(variant));
  const double err = check_partition_of_unity(w, ell_max);
  const bool ok = err <= 1e-6;
  nlohmann::json out{{"B", B},
                     {"ell_max", ell_max},
                     {"variant", variant},
                     {"max_deviation", err},
                     {"b_at_1", w(1.0)},
                     {"ok", ok}};
  std::cout << out.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_fit(const std::string& config_path, const std::string& data_path, const std::string& coeffs_path,
            bool linear) {
  const auto cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::from_json(read_json(config_path));
  const auto data = read_data_csv(data_path, cfg.d);
  if (data.n() < 2) throw std::runtime_error("fit needs at least two observations");
  const int J = truncation_level(data.n(), cfg.B, cfg.d);
  const auto frame = build_frame(cfg.d, cfg.B, J, build_window(cfg.B, cfg.window));
  const auto emp = empirical_coefficients(frame, data, J);
  const auto est = linear ? fit_linear(frame, emp) : fit_global(frame, emp, cfg.p);

  nlohmann::json out{{"frame", frame_descriptor(frame)},
                     {"thresholds", est.report.to_json()},
                     {"selected", est.report.selected()}};
  std::cout << out.dump(2) << '\n';
  if (!coeffs_path.empty()) {
    std::ostringstream csv;
    write_estimate_csv(csv, est);
    write_text(coeffs_path, csv.str());
  }
  return 0;
}

int cmd_simulate(const std::string& preset_name, const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> replicates, std::string out_path, const std::string& csv_path) {
  auto cfg = config_path.empty() ? preset(preset_name) : ExperimentConfig::from_json(read_json(config_path));
  if (seed) cfg.seed = *seed;
  if (replicates) cfg.replicates = *replicates;
  if (out_path.empty()) out_path = cfg.output;
  cfg.output = out_path;

  const auto report = run_experiment(cfg, [&](const RiskReport& partial, const CellResult& cell) {
    std::cerr << "cell n=" << cell.n << " sigma=" << cell.sigma_frac << "M: global " << cell.global_mean
              << " linear " << cell.linear_mean << " mode {" << cell.modal_selection() << "} (" << cell.wall_seconds
              << " s)\n";
    if (!out_path.empty()) write_text(out_path, partial.to_json().dump(2) + "\n");
  });

  std::ostringstream csv;
  write_report_csv(csv, report);
  if (!csv_path.empty()) write_text(csv_path, csv.str());
  if (out_path.empty()) {
    std::cout << report.to_json().dump(2) << '\n';
  } else {
    write_text(out_path, report.to_json().dump(2) + "\n");
    if (csv_path.empty()) std::cout << csv.str();
  }
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& format) {
  const auto report = RiskReport::from_json(read_json(in_path));
  if (format == "csv") {
    write_report_csv(std::cout, report);
  } else {
    std::cout << report.to_json().dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Needlet global thresholding regression on the circle and sphere"};
  app.require_subcommand(1);

  auto* wc = app.add_subcommand("window-check", "Check the partition of unity of the window");
  double B = 2.0;
  int ell_max = 512;
  std::string variant = "smooth_bump";
  wc->add_option("--B", B, "Scale B > 1")->capture_default_str();
  wc->add_option("--ell-max", ell_max, "Largest frequency checked")->capture_default_str()->check(CLI::PositiveNumber);
  wc->add_option("--variant", variant, "smooth_bump or bspline")->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Fit the thresholded estimator to a CSV sample");
  std::string config_path;
  std::string data_path;
  std::string coeffs_path;
  bool linear = false;
  fit->add_option("--config", config_path, "Experiment config (JSON); B, d, p and window are used");
  fit->add_option("--data", data_path, "CSV with columns x,y (or colatitude,longitude,y)")->required();
  fit->add_option("--coeffs", coeffs_path, "Write j,k,beta_hat,tau CSV here");
  fit->add_flag("--linear", linear, "Keep every level instead of thresholding");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk study");
  std::string preset_name;
  std::string sim_config;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::string out_path;
  std::string csv_path;
  auto* preset_opt = sim->add_option("--preset", preset_name, "example-4.1, example-4.2 or example-4.3");
  auto* config_opt = sim->add_option("--config", sim_config, "Experiment config (JSON)");
  preset_opt->excludes(config_opt);
  sim->add_option("--seed", seed, "Base seed");
  sim->add_option("--replicates", replicates, "Replicates per cell")->check(CLI::PositiveNumber);
  sim->add_option("--out", out_path, "JSON report path, rewritten after every cell");
  sim->add_option("--csv", csv_path, "CSV summary path");

  auto* rep = app.add_subcommand("report", "Convert a JSON report");
  std::string in_path;
  std::string format = "csv";
  rep->add_option("--in", in_path, "JSON report")->required();
  rep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*wc) return cmd_window_check(B, ell_max, variant);
    if (*fit) return cmd_fit(config_path, data_path, coeffs_path, linear);
    if (*sim) {
      if (preset_name.empty() && sim_config.empty()) throw std::invalid_argument("simulate needs --preset or --config");
      return cmd_simulate(preset_name, sim_config, seed, replicates, out_path, csv_path);
    }
    if (*rep) return cmd_report(in_path, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
