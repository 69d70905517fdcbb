#include "chdyn/cli.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "chdyn/config.hpp"
#include "chdyn/errors.hpp"
#include "chdyn/io.hpp"
#include "chdyn/simulation.hpp"

namespace chdyn {

namespace {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.key.empty()) err << " [" << e.key << "]";
    err << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StepFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const InvalidState& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int cmd_run(const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig rc = load_run_config(config_path);
    const std::filesystem::path dir = out_dir.value_or(rc.output_dir);
    const auto disc = Discretization::create(rc.cells, rc.boundary_factor);
    const int steps = rc.model.num_steps();

    const std::set<int> wanted(rc.snapshot_steps.begin(), rc.snapshot_steps.end());
    SimulationOptions sim;
    sim.newton = rc.newton;
    sim.record_stride = steps;
    sim.observer = [&](const SystemState& s, const StepReport&) {
      if (wanted.count(s.step) && s.step != steps) write_snapshots(dir, s, *disc);
    };
    const Trajectory traj = simulate(rc.model, disc, rc.initial_condition(), sim);

    write_file_atomic(dir / "series.csv", [&](std::ostream& o) { write_series_csv(o, traj); });
    if (wanted.empty() || wanted.count(0)) write_snapshots(dir, traj.states.front(), *disc);
    if (wanted.empty() || wanted.count(steps)) write_snapshots(dir, traj.states.back(), *disc);
    if (rc.write_mesh) {
      write_file_atomic(dir / "mesh.csv", [&](std::ostream& o) { write_mesh_csv(o, disc->bulk); });
    }
  });
}

int cmd_sweep(const std::string& kind, const std::filesystem::path& config_path,
              const std::optional<std::filesystem::path>& out_dir, std::optional<int> threads,
              std::ostream& err) {
  return guarded(err, [&] {
    if (kind != "tau" && kind != "ell" && kind != "hgamma") {
      throw InvalidArgument("unknown sweep kind '" + kind + "' (expected tau, ell or hgamma)");
    }
    const RunConfig rc = load_run_config(config_path);
    const std::filesystem::path dir = out_dir.value_or(rc.output_dir);
    const int workers = threads.value_or(rc.threads);
    if (workers < 1) throw InvalidArgument("--threads must be >= 1");

    if (kind == "ell") {
      EllSweepOptions o;
      o.cfg = rc.model;
      o.cells = rc.cells;
      o.boundary_factor = rc.boundary_factor;
      o.ells = rc.sweep.ells;
      o.reference_tau = rc.sweep.reference_tau;
      if (!(o.reference_tau > 0.0))
        throw ConfigError("sweep.reference_tau", "ell sweep needs sweep.reference_tau");
      o.newton = rc.newton;
      o.threads = workers;
      o.initial_frequency = rc.initial_frequency;
      const auto rows = run_ell_sweep(o);
      write_file_atomic(dir / "sweep.csv", [&](std::ostream& s) { write_ell_sweep_csv(s, rows); });
      return;
    }

    OrderStudyOptions o;
    o.cfg = rc.model;
    o.cells = rc.cells;
    o.taus = rc.sweep.taus;
    if (o.taus.size() < 2) throw ConfigError("sweep.taus", "sweep needs at least two sweep.taus");
    o.reference_tau = rc.sweep.reference_tau;
    if (!(o.reference_tau > 0.0))
      throw ConfigError("sweep.reference_tau", "sweep needs sweep.reference_tau");
    if (kind == "tau") {
      o.boundary_factors = {rc.boundary_factor};
    } else {
      o.boundary_factors = rc.sweep.boundary_factors;
      o.reference_factor = rc.sweep.reference_factor;
    }
    o.newton = rc.newton;
    o.threads = workers;
    o.initial_frequency = rc.initial_frequency;
    for (double tau : o.taus) {
      ModelConfig c = o.cfg;
      c.tau = tau;
      try {
        (void)c.num_steps();
      } catch (const InvalidArgument& e) {
        throw ConfigError("sweep.taus", e.what());
      }
    }
    const OrderStudy study = run_temporal_order_study(o);
    write_file_atomic(dir / "sweep.csv", [&](std::ostream& s) { write_order_study_csv(s, study); });
  });
}

}  // namespace chdyn
