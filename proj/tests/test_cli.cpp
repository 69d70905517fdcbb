#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chdyn/cli.hpp"
#include "chdyn/config.hpp"
#include "chdyn/io.hpp"
#include "doctest.h"

using namespace chdyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chdyn_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> column(const std::vector<std::string>& lines, int col) {
  std::vector<double> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string cell;
    for (int c = 0; c <= col; ++c) std::getline(ss, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kNeumann = R"([model]
type = neumann
[discretization]
cells = 4
tau = 1e-4
final_time = 1e-3
)";

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(R"([model]
type = liu_wu
order = cn
epsilon = 0.03
[discretization]
cells = 8
boundary_factor = 2
tau = 1e-4
final_time = 1e-3
[solver]
abs_tol = 1e-10
[output]
dir = somewhere
snapshots = 0, 5
[sweep]
taus = 1e-4, 5e-5
)");
  const RunConfig rc = parse_run_config(in);
  CHECK(rc.model.model == Model::LiuWu);
  CHECK(rc.model.order == SchemeOrder::SecondCN);
  CHECK(rc.model.epsilon == 0.03);
  CHECK(rc.cells == 8);
  CHECK(rc.boundary_factor == 2);
  CHECK(rc.newton.abs_tol == 1e-10);
  CHECK(rc.output_dir == fs::path("somewhere"));
  CHECK(rc.snapshot_steps == std::vector<int>{0, 5});
  CHECK(rc.sweep.taus == std::vector<double>{1e-4, 5e-5});
}

TEST_CASE("shipped example configs parse") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(CHDYN_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_run_config(entry.path()));
    ++count;
  }
  CHECK(count >= 3);
}

TEST_CASE("config errors name the offending key") {
  auto key_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_run_config(in);
    } catch (const ConfigError& e) {
      return e.key;
    }
    return std::string("<none>");
  };
  CHECK(key_of("[discretization]\ncells=4\ntau=1e-4\nfinal_time=1e-3\n") == "model.type");
  CHECK(key_of("[model]\ntype=neumann\n[discretization]\ntau=1e-4\nfinal_time=1e-3\n") ==
        "discretization.cells");
  CHECK(key_of(std::string(kNeumann) + "colour = red\n") == "discretization.colour");
  CHECK(key_of("[model]\ntype=neumann\n[discretization]\ncells=x\ntau=1e-4\nfinal_time=1e-3\n") ==
        "discretization.cells");
  CHECK(key_of("[model]\ntype=allen_cahn\norder=second\n[discretization]\ncells=4\ntau=1e-4\n"
               "final_time=1e-3\nell=2\n") == "discretization.ell");
  CHECK(key_of("[model]\ntype=robin\n[discretization]\ncells=4\ntau=1e-4\nfinal_time=1e-3\n") ==
        "model.type");
}

TEST_CASE("run writes N+1 series rows and snapshots") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, kNeumann);
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, dir / "out", err) == kExitOk);
  const auto lines = read_lines(dir / "out" / "series.csv");
  CHECK(lines.front() ==
        "step,t,mass_bulk,mass_surf,mass_total,energy_bulk,energy_surf,energy_total,"
        "newton_iters,residual");
  CHECK(lines.size() == 1 + 11);
  CHECK(fs::exists(dir / "out" / "u_0.csv"));
  CHECK(fs::exists(dir / "out" / "u_10.csv"));
  CHECK(fs::exists(dir / "out" / "w_10.csv"));
  CHECK(!fs::exists(dir / "out" / "p_10.csv"));
  CHECK(read_lines(dir / "out" / "u_10.csv").size() == 1 + 41);
}

TEST_CASE("allen-cahn run: monotone energy column and boundary snapshot") {
  const fs::path dir = scratch("ac");
  const fs::path cfg = write_config(dir, R"([model]
type = allen_cahn
[discretization]
cells = 8
tau = 1e-5
final_time = 1e-4
[output]
snapshots = 5, 10
mesh = true
)");
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, dir / "out", err) == kExitOk);
  const auto e = column(read_lines(dir / "out" / "series.csv"), 7);
  REQUIRE(e.size() == 11u);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < e[i - 1]);
  CHECK(fs::exists(dir / "out" / "p_5.csv"));
  CHECK(fs::exists(dir / "out" / "p_10.csv"));
  CHECK(!fs::exists(dir / "out" / "u_0.csv"));
  CHECK(fs::exists(dir / "out" / "mesh.csv"));
  CHECK(read_lines(dir / "out" / "p_10.csv").front() == "s,x,y,value");
}

TEST_CASE("invalid config gives exit code 2 with the key in the message") {
  const fs::path dir = scratch("bad");
  const fs::path cfg = write_config(dir, R"([model]
type = allen_cahn
order = second
[discretization]
cells = 4
tau = 1e-4
final_time = 1e-3
ell = 2
)");
  std::ostringstream err;
  CHECK(cmd_run(cfg, dir / "out", err) == kExitConfig);
  CHECK(err.str().find("discretization.ell") != std::string::npos);
  std::ostringstream err2;
  CHECK(cmd_run(dir / "missing.ini", dir / "out", err2) == kExitConfig);
}

TEST_CASE("solver failure gives exit code 3") {
  const fs::path dir = scratch("fail");
  const fs::path cfg = write_config(
      dir, std::string(kNeumann) + "[solver]\nmax_iters = 1\nabs_tol = 1e-30\nrel_tol = 1e-30\n");
  std::ostringstream err;
  CHECK(cmd_run(cfg, dir / "out", err) == kExitSolver);
  CHECK(err.str().find("solver failure") != std::string::npos);
}

TEST_CASE("repeated runs give bit-identical series") {
  const fs::path dir = scratch("det");
  const fs::path cfg = write_config(dir, R"([model]
type = gms
order = cn
[discretization]
cells = 6
boundary_factor = 2
tau = 1e-5
final_time = 1e-4
)");
  std::ostringstream err;
  REQUIRE(cmd_run(cfg, dir / "a", err) == kExitOk);
  REQUIRE(cmd_run(cfg, dir / "b", err) == kExitOk);
  CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
}

TEST_CASE("tau sweep: one row per tau plus order columns") {
  const fs::path dir = scratch("tau");
  const fs::path cfg = write_config(dir, R"([model]
type = liu_wu
epsilon = 0.1
delta = 0.1
[discretization]
cells = 8
tau = 1e-3
final_time = 8e-3
initial_frequency = 1
[sweep]
taus = 1e-3, 5e-4, 2.5e-4, 1.25e-4
reference_tau = 1.5625e-5
)");
  std::ostringstream err;
  REQUIRE(cmd_sweep("tau", cfg, dir / "out", 2, err) == kExitOk);
  const auto lines = read_lines(dir / "out" / "sweep.csv");
  CHECK(lines.size() == 1 + 4);
  CHECK(lines.front().find("order_l2_h1_p") != std::string::npos);
  CHECK(lines.front().find("fitted_l2_h1_p") != std::string::npos);
  const auto fitted = column(lines, 13);
  CHECK(fitted.front() == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("ell sweep: monotone p-error column") {
  const fs::path dir = scratch("ell");
  const fs::path cfg = write_config(dir, R"([model]
type = allen_cahn
epsilon = 0.02
delta = 0.2
sigma = 0.01
kappa = 5
[discretization]
cells = 8
tau = 2.5e-3
final_time = 0.05
[sweep]
ells = 1, 2, 4
reference_tau = 1.5625e-4
)");
  std::ostringstream err;
  REQUIRE(cmd_sweep("ell", cfg, dir / "out", std::nullopt, err) == kExitOk);
  const auto lines = read_lines(dir / "out" / "sweep.csv");
  REQUIRE(lines.size() == 1 + 3);
  const auto p_err = column(lines, 4);
  CHECK(p_err[1] < p_err[0]);
  CHECK(p_err[2] < p_err[1]);
}

TEST_CASE("hgamma sweep emits per-factor rows with finest-boundary errors") {
  const fs::path dir = scratch("hgamma");
  const fs::path cfg = write_config(dir, R"([model]
type = liu_wu
order = cn
epsilon = 0.1
delta = 0.1
[discretization]
cells = 4
tau = 1e-3
final_time = 8e-3
initial_frequency = 1
[sweep]
taus = 2e-3, 1e-3, 5e-4
boundary_factors = 1, 2
reference_tau = 2.5e-4
reference_factor = 4
)");
  std::ostringstream err;
  REQUIRE(cmd_sweep("hgamma", cfg, dir / "out", 2, err) == kExitOk);
  const auto lines = read_lines(dir / "out" / "sweep.csv");
  CHECK(lines.size() == 1 + 6);
  CHECK(lines.front().find("finest_err_l2_h1_p") != std::string::npos);
  std::ostringstream err2;
  CHECK(cmd_sweep("bogus", cfg, dir / "out", 1, err2) == kExitConfig);
}

#ifdef CHDYN_CLI_PATH
TEST_CASE("command-line front end exit codes") {
  const fs::path dir = scratch("exe");
  const fs::path cfg = write_config(dir, kNeumann);
  const std::string exe = CHDYN_CLI_PATH;
  const std::string quiet = " > " + (dir / "log.txt").string() + " 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  CHECK(status(std::system(
            (exe + " run " + cfg.string() + " --out " + (dir / "o").string() + quiet).c_str())) ==
        0);
  CHECK(fs::exists(dir / "o" / "series.csv"));
  CHECK(status(std::system((exe + " run " + (dir / "nope.ini").string() + quiet).c_str())) == 2);
  CHECK(status(std::system((exe + " sweep --kind nope " + cfg.string() + quiet).c_str())) == 2);
  CHECK(status(std::system((exe + quiet).c_str())) == 2);
}
#endif

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}
