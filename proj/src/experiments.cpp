#include "chdyn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "chdyn/errors.hpp"

namespace chdyn {

std::function<double(Point)> cosine_product(double frequency) {
  return [frequency](Point p) {
    return std::cos(frequency * std::numbers::pi * p.x) *
           std::cos(frequency * std::numbers::pi * p.y);
  };
}

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

int stride_for(double coarse_tau, double fine_tau) {
  const double r = coarse_tau / fine_tau;
  const long k = std::lround(r);
  if (k < 1 || std::abs(r - k) > 1e-9 * r) {
    throw InvalidArgument("reference step does not divide the coarse step");
  }
  return static_cast<int>(k);
}

FittedOrders orders_between(const TrajectoryErrors& a, const TrajectoryErrors& b) {
  return {observed_order(a.linf_l2_bulk, b.linf_l2_bulk),
          observed_order(a.l2_h1_bulk, b.l2_h1_bulk),
          observed_order(a.linf_l2_surface, b.linf_l2_surface),
          observed_order(a.l2_h1_surface, b.l2_h1_surface)};
}

}  // namespace

std::vector<ModelRun> run_model_comparison(const ComparisonOptions& o) {
  const auto disc = Discretization::create(o.cells, o.boundary_factor);
  const std::vector<Model> models{Model::Neumann, Model::AllenCahn, Model::LiuWu, Model::GMS};
  std::vector<ModelRun> runs(models.size());
  const auto u0 = cosine_product(4.0);
  parallel_for(static_cast<int>(models.size()), o.threads, [&](int i) {
    ModelConfig cfg;
    cfg.model = models[i];
    cfg.order = o.order;
    cfg.epsilon = o.epsilon;
    cfg.delta = o.delta;
    cfg.sigma = o.sigma;
    cfg.kappa = o.kappa;
    cfg.final_time = o.final_time;
    cfg.tau = o.final_time / o.steps;
    SimulationOptions sim;
    sim.newton = o.newton;
    sim.record_stride = o.steps;
    ModelRun& run = runs[i];
    run.model = cfg.model;
    run.trajectory = simulate(cfg, disc, u0, sim);
    run.audit = dissipation_audit(run.trajectory, 1e-9 * std::abs(run.trajectory.initial_energy));
    run.drift = mass_drift(run.trajectory);
  });
  return runs;
}

std::vector<EllSweepRow> run_ell_sweep(const EllSweepOptions& o) {
  if (o.cfg.model != Model::AllenCahn && o.cfg.model != Model::LiuWu) {
    throw InvalidArgument("run_ell_sweep: model must be allen_cahn or liu_wu");
  }
  if (o.cfg.order != SchemeOrder::First) {
    throw InvalidArgument("run_ell_sweep: boundary substepping needs the first-order scheme");
  }
  if (!(o.reference_tau > 0.0)) throw InvalidArgument("run_ell_sweep: reference_tau must be set");
  const auto disc = Discretization::create(o.cells, o.boundary_factor);
  const auto u0 = cosine_product(o.initial_frequency);

  ModelConfig ref_cfg = o.cfg;
  ref_cfg.ell = 1;
  ref_cfg.tau = o.reference_tau;
  SimulationOptions ref_sim;
  ref_sim.newton = o.newton;
  ref_sim.record_stride = stride_for(o.cfg.tau, o.reference_tau);
  const Trajectory reference = simulate(ref_cfg, disc, u0, ref_sim);

  std::vector<EllSweepRow> rows(o.ells.size());
  parallel_for(static_cast<int>(o.ells.size()), o.threads, [&](int i) {
    ModelConfig cfg = o.cfg;
    cfg.ell = o.ells[i];
    SimulationOptions sim;
    sim.newton = o.newton;
    const Trajectory traj = simulate(cfg, disc, u0, sim);
    rows[i].ell = cfg.ell;
    rows[i].errors = trajectory_errors(traj, reference);
    rows[i].audit = dissipation_audit(traj, 1e-9 * std::abs(traj.initial_energy));
    rows[i].drift = mass_drift(traj);
  });
  return rows;
}

OrderStudy run_temporal_order_study(const OrderStudyOptions& o) {
  if (o.taus.size() < 2) throw InvalidArgument("run_temporal_order_study: need at least two taus");
  if (!(o.reference_tau > 0.0)) {
    throw InvalidArgument("run_temporal_order_study: reference_tau must be set");
  }
  const double smallest = *std::min_element(o.taus.begin(), o.taus.end());
  const int stride = stride_for(smallest, o.reference_tau);
  for (double tau : o.taus) stride_for(tau, smallest);

  const auto u0 = cosine_product(o.initial_frequency);
  const auto& factors = o.boundary_factors;
  const int nf = static_cast<int>(factors.size());
  std::vector<std::shared_ptr<const Discretization>> discs(nf);
  for (int f = 0; f < nf; ++f) discs[f] = Discretization::create(o.cells, factors[f]);

  auto reference_run = [&](std::shared_ptr<const Discretization> disc) {
    ModelConfig cfg = o.cfg;
    cfg.tau = o.reference_tau;
    SimulationOptions sim;
    sim.newton = o.newton;
    sim.record_stride = stride;
    return simulate(cfg, std::move(disc), u0, sim);
  };

  // References: one per boundary factor plus the optional finest one.
  const bool cross = o.reference_factor > 0;
  std::vector<Trajectory> refs(nf + (cross ? 1 : 0));
  parallel_for(static_cast<int>(refs.size()), o.threads, [&](int i) {
    refs[i] =
        reference_run(i < nf ? discs[i] : Discretization::create(o.cells, o.reference_factor));
  });

  const int nt = static_cast<int>(o.taus.size());
  OrderStudy study;
  study.rows.resize(static_cast<std::size_t>(nf) * nt);
  parallel_for(nf * nt, o.threads, [&](int job) {
    const int f = job / nt;
    const int t = job % nt;
    ModelConfig cfg = o.cfg;
    cfg.tau = o.taus[t];
    SimulationOptions sim;
    sim.newton = o.newton;
    const Trajectory traj = simulate(cfg, discs[f], u0, sim);
    OrderStudyRow& row = study.rows[job];
    row.boundary_factor = factors[f];
    row.tau = cfg.tau;
    row.same_mesh = trajectory_errors(traj, refs[f]);
    if (cross) row.finest = trajectory_errors(traj, refs[nf]);
    row.audit = dissipation_audit(traj, 1e-9 * std::abs(traj.initial_energy));
    row.drift = mass_drift(traj);
  });

  for (int f = 0; f < nf; ++f) {
    std::vector<double> taus, e0, e1, e2, e3;
    for (int t = 0; t < nt; ++t) {
      OrderStudyRow& row = study.rows[static_cast<std::size_t>(f) * nt + t];
      if (t > 0) {
        row.observed = orders_between(
            study.rows[static_cast<std::size_t>(f) * nt + t - 1].same_mesh, row.same_mesh);
      }
      taus.push_back(row.tau);
      e0.push_back(row.same_mesh.linf_l2_bulk);
      e1.push_back(row.same_mesh.l2_h1_bulk);
      e2.push_back(row.same_mesh.linf_l2_surface);
      e3.push_back(row.same_mesh.l2_h1_surface);
    }
    FittedOrders fit;
    fit.linf_l2_bulk = fitted_order(taus, e0);
    fit.l2_h1_bulk = fitted_order(taus, e1);
    if (has_boundary(o.cfg.model)) {
      fit.linf_l2_surface = fitted_order(taus, e2);
      fit.l2_h1_surface = fitted_order(taus, e3);
    }
    study.fitted[factors[f]] = fit;
  }
  return study;
}

}  // namespace chdyn
