#include "needlet/sim.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace needlet;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "needlet_cli_stdout.txt";
  const std::string cmd = std::string(NEEDLET_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "needlet_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("window-check") {
  const auto ok = run("window-check --B 2 --ell-max 512");
  CHECK(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["ok"] == true);
  CHECK(j["max_deviation"].get<double>() <= 1e-6);
  CHECK(run("window-check --B 0.5").code != 0);
}

TEST_CASE("fit from csv") {
  const auto dir = scratch_dir();
  const auto data = generate_dataset(TestFunctionId::F2, 256, 0.25, NoiseFamily::gaussian, 3);
  {
    std::ofstream csv(dir / "data.csv");
    csv.precision(17);
    csv << "x,y\n";
    for (std::size_t i = 0; i < data.n(); ++i) csv << data.x[i].angle() << ',' << data.y[i] << '\n';
  }
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"B": 2.0, "p": 2})";
  }
  const auto r = run("fit --config " + (dir / "cfg.json").string() + " --data " + (dir / "data.csv").string() +
                     " --coeffs " + (dir / "est.csv").string());
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["selected"] == nlohmann::json::array({2}));
  CHECK(j["thresholds"]["J_n"] == 8);
  std::ifstream est(dir / "est.csv");
  std::string header;
  std::getline(est, header);
  CHECK(header == "j,k,beta_hat,tau");
  CHECK(run("fit --data " + (dir / "missing.csv").string()).code != 0);
}

TEST_CASE("simulate and report") {
  const auto dir = scratch_dir();
  {
    std::ofstream cfg(dir / "sim.json");
    cfg << R"({"test_function": "F2", "n": [64], "sigma_frac": [0.5], "replicates": 4, "grid_size": 256})";
  }
  const auto json_path = (dir / "report.json").string();
  const auto a = run("simulate --config " + (dir / "sim.json").string() + " --seed 5 --out " + json_path);
  REQUIRE(a.code == 0);
  const auto first = a.out;
  const auto b = run("simulate --config " + (dir / "sim.json").string() + " --seed 5 --out " + json_path);
  CHECK(b.out == first);
  const auto rep = run("report --in " + json_path + " --format csv");
  CHECK(rep.code == 0);
  CHECK(rep.out == first);
  CHECK(rep.out.rfind("test_fn,n,J_n,sigma_frac,p,R,", 0) == 0);
  CHECK(run("simulate --preset example-7").code != 0);
  CHECK(run("simulate").code != 0);
}
