#include "chdyn/simulation.hpp"

#include <chrono>

#include "chdyn/errors.hpp"

namespace chdyn {

Trajectory simulate(const ModelConfig& cfg, std::shared_ptr<const Discretization> disc,
                    SystemState initial, const SimulationOptions& options) {
  cfg.validate();
  options.newton.validate();
  if (!disc) throw InvalidArgument("simulate: missing discretization");
  if (options.record_stride < 1) throw InvalidArgument("simulate: record_stride must be >= 1");
  const int steps = cfg.num_steps();

  if (cfg.order == SchemeOrder::SecondCN && initial.w.size() == 0) {
    InitialPotentials ip = initial_chemical_potentials(cfg, *disc, initial.u, initial.p);
    initial.w = std::move(ip.w);
    initial.surface_potential = std::move(ip.surface_potential);
    initial.lambda = std::move(ip.lambda);
    initial.mu = std::move(ip.mu);
  }

  Trajectory traj;
  traj.cfg = cfg;
  traj.disc = disc;
  traj.reports.reserve(steps);
  traj.initial_energies = energies(initial, cfg, *disc);
  traj.initial_energy = traj.initial_energies.total;
  traj.initial_masses = masses(initial, *disc);
  initial.step = 0;
  traj.states.push_back(initial);

  SystemState current = std::move(initial);
  double energy = traj.initial_energy;
  NewtonWorkspace workspace;
  for (int n = 0; n < steps; ++n) {
    const auto start = std::chrono::steady_clock::now();
    NewtonResult info;
    SystemState next = advance(cfg, *disc, current, options.newton, &info, &workspace);
    const auto stop = std::chrono::steady_clock::now();

    StepReport rep;
    rep.step = next.step;
    rep.newton_iterations = info.iterations;
    rep.residual_norm = info.residual_history.back();
    rep.energy_before = energy;
    const Energies e = energies(next, cfg, *disc);
    rep.energy_after = e.total;
    rep.energy_bulk = e.bulk;
    rep.energy_surface = e.surface;
    const Masses m = masses(next, *disc);
    rep.mass_bulk = m.bulk;
    rep.mass_surface = m.surface;
    rep.mass_total = m.total;
    rep.wall_time = std::chrono::duration<double>(stop - start).count();
    energy = rep.energy_after;

    if (options.observer) options.observer(next, rep);
    traj.reports.push_back(rep);
    if (next.step % options.record_stride == 0 || next.step == steps) {
      traj.states.push_back(next);
    }
    current = std::move(next);
  }
  return traj;
}

Trajectory simulate(const ModelConfig& cfg, std::shared_ptr<const Discretization> disc,
                    const std::function<double(Point)>& u0, const SimulationOptions& options) {
  if (!disc) throw InvalidArgument("simulate: missing discretization");
  return simulate(cfg, disc, consistent_initial_state(cfg, *disc, u0), options);
}

}  // namespace chdyn
