#include <atomic>
#include <cmath>
#include <stdexcept>

#include "chdyn/errors.hpp"
#include "chdyn/experiments.hpp"
#include "doctest.h"

using namespace chdyn;

TEST_CASE("cosine start") {
  const auto u0 = cosine_product();
  CHECK(u0({0.0, 0.0}) == 1.0);
  CHECK(u0({0.125, 0.0}) == doctest::Approx(std::cos(0.5 * M_PI)));
  CHECK(u0({0.25, 0.5}) == doctest::Approx(-1.0));
}

TEST_CASE("parallel_for runs every job once and propagates failures") {
  for (int threads : {1, 3}) {
    std::vector<std::atomic<int>> hits(17);
    parallel_for(17, threads, [&](int i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(5, threads,
                                 [](int i) {
                                   if (i == 3) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
}

TEST_CASE("model comparison reproduces the mass table on a small grid") {
  ComparisonOptions o;
  o.cells = 8;
  o.final_time = 1e-4;
  o.steps = 10;
  const auto runs = run_model_comparison(o);
  REQUIRE(runs.size() == 4u);
  for (const ModelRun& r : runs) {
    CAPTURE(to_string(r.model));
    CHECK(r.audit.pass);
    CHECK(r.trajectory.states.size() == 2u);
    CHECK(r.trajectory.reports.size() == 10u);
  }
  CHECK(runs[0].drift.bulk <= 1e-10);
  CHECK(runs[1].drift.bulk <= 1e-10);
  CHECK(runs[1].drift.surface >= 1e-6);
  CHECK(runs[2].drift.bulk <= 1e-10);
  CHECK(runs[2].drift.surface <= 1e-10);
  CHECK(runs[3].drift.total <= 1e-10);
  CHECK(runs[3].drift.bulk >= 1e-6);
}

TEST_CASE("ell sweep: ell=1 row equals a plain first-order run") {
  EllSweepOptions o;
  o.cfg.model = Model::AllenCahn;
  o.cfg.epsilon = 0.02;
  o.cfg.delta = 0.2;
  o.cfg.sigma = 0.01;
  o.cfg.kappa = 5.0;
  o.cfg.tau = 1e-3;
  o.cfg.final_time = 4e-3;
  o.cells = 4;
  o.ells = {1, 2};
  o.reference_tau = 2.5e-4;
  o.initial_frequency = 1.0;
  const auto rows = run_ell_sweep(o);
  REQUIRE(rows.size() == 2u);

  const auto disc = Discretization::create(4);
  const auto u0 = cosine_product(1.0);
  ModelConfig ref_cfg = o.cfg;
  ref_cfg.tau = o.reference_tau;
  SimulationOptions ref_sim;
  ref_sim.record_stride = 4;
  const Trajectory ref = simulate(ref_cfg, disc, u0, ref_sim);
  const TrajectoryErrors plain = trajectory_errors(simulate(o.cfg, disc, u0), ref);
  CHECK(rows[0].errors.linf_l2_surface == doctest::Approx(plain.linf_l2_surface).epsilon(1e-12));
  CHECK(rows[0].errors.l2_h1_bulk == doctest::Approx(plain.l2_h1_bulk).epsilon(1e-12));
  for (const auto& r : rows) CHECK(r.audit.pass);

  EllSweepOptions bad = o;
  bad.cfg.model = Model::GMS;
  CHECK_THROWS_AS(run_ell_sweep(bad), InvalidArgument);
}

TEST_CASE("temporal order study structure and determinism across thread counts") {
  OrderStudyOptions o;
  o.cfg.model = Model::LiuWu;
  o.cfg.final_time = 4e-3;
  o.cells = 4;
  o.taus = {1e-3, 5e-4, 2.5e-4};
  o.boundary_factors = {1, 2};
  o.reference_tau = 1.25e-4;
  o.reference_factor = 4;
  o.initial_frequency = 1.0;
  const OrderStudy a = run_temporal_order_study(o);
  REQUIRE(a.rows.size() == 6u);
  CHECK(a.fitted.size() == 2u);
  CHECK(!a.rows[0].observed);
  CHECK(a.rows[1].observed);
  CHECK(a.rows[0].finest);
  CHECK(a.rows[0].same_mesh.l2_h1_surface > a.rows[2].same_mesh.l2_h1_surface);

  o.threads = 3;
  const OrderStudy b = run_temporal_order_study(o);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].same_mesh.l2_h1_surface == b.rows[i].same_mesh.l2_h1_surface);
    CHECK(a.rows[i].boundary_factor == b.rows[i].boundary_factor);
    CHECK(a.rows[i].tau == b.rows[i].tau);
  }

  OrderStudyOptions bad = o;
  bad.reference_tau = 3e-4;
  CHECK_THROWS_AS(run_temporal_order_study(bad), InvalidArgument);
  bad = o;
  bad.taus = {1e-3};
  CHECK_THROWS_AS(run_temporal_order_study(bad), InvalidArgument);
}
