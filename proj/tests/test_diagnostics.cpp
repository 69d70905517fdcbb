#include <cmath>
#include <numeric>
#include <random>

#include "chdyn/diagnostics.hpp"
#include "chdyn/errors.hpp"
#include "chdyn/experiments.hpp"
#include "chdyn/simulation.hpp"
#include "doctest.h"

using namespace chdyn;

namespace {

SystemState constant(const Discretization& d, double u, double p) {
  SystemState s;
  s.u = Vector::Constant(d.num_bulk(), u);
  s.p = Vector::Constant(d.num_boundary(), p);
  return s;
}

Trajectory synthetic(std::shared_ptr<const Discretization> d, Model model, double tau, int steps,
                     const std::function<SystemState(int)>& at) {
  Trajectory t;
  t.cfg.model = model;
  t.cfg.tau = tau;
  t.cfg.final_time = tau * steps;
  t.disc = std::move(d);
  for (int n = 0; n <= steps; ++n) {
    SystemState s = at(n);
    s.step = n;
    t.states.push_back(std::move(s));
  }
  return t;
}

}  // namespace

TEST_CASE("masses of constant fields") {
  const auto d = Discretization::create(5, 3);
  const Masses m = masses(constant(*d, 1.0, 1.0), *d);
  CHECK(m.bulk == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.surface == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(m.total == doctest::Approx(5.0).epsilon(1e-14));
  SystemState neumann;
  neumann.u = Vector::Constant(d->num_bulk(), 2.0);
  CHECK(masses(neumann, *d).surface == 0.0);
}

TEST_CASE("discrete mass of the cosine start vanishes under refinement") {
  const auto u0 = cosine_product(4.0);
  double prev = 1e300;
  for (int n : {8, 16, 32}) {
    const auto d = Discretization::create(n);
    ModelConfig cfg;
    const SystemState s = consistent_initial_state(cfg, *d, u0);
    const double m = std::abs(masses(s, *d).bulk);
    CHECK(m <= prev + 1e-15);
    CHECK(m < 1e-12);
    prev = m;
  }
}

TEST_CASE("energies of constant states") {
  const auto d = Discretization::create(4, 2);
  ModelConfig cfg;
  cfg.model = Model::LiuWu;
  const Energies zero = energies(constant(*d, 0.0, 0.0), cfg, *d);
  CHECK(zero.bulk == doctest::Approx(12.5).epsilon(1e-14));
  CHECK(zero.surface == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(zero.total == doctest::Approx(62.5).epsilon(1e-14));
  for (double s : {1.0, -1.0}) {
    const Energies pure = energies(constant(*d, s, s), cfg, *d);
    CHECK(std::abs(pure.total) < 1e-14);
  }
}

TEST_CASE("energies and masses are invariant under vertex relabelling") {
  const auto d = Discretization::create(4);
  const BulkMesh& m = d->bulk;
  const int nv = m.num_vertices();
  std::vector<int> perm(nv);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(9);
  std::shuffle(perm.begin(), perm.end(), gen);
  BulkMesh pm = m;
  for (int i = 0; i < nv; ++i) pm.vertices[perm[i]] = m.vertices[i];
  for (auto& t : pm.triangles) {
    for (int& v : t) v = perm[v];
  }
  for (int& v : pm.boundary_vertices) v = perm[v];
  const auto dp = Discretization::create(pm, d->boundary);

  ModelConfig cfg;
  SystemState s, sp;
  s.u.resize(nv);
  sp.u.resize(nv);
  const auto u0 = cosine_product(1.0);
  for (int i = 0; i < nv; ++i) {
    s.u[i] = u0(m.vertices[i]);
    sp.u[perm[i]] = s.u[i];
  }
  CHECK(energies(s, cfg, *d).total == doctest::Approx(energies(sp, cfg, *dp).total).epsilon(1e-13));
  CHECK(masses(s, *d).bulk == doctest::Approx(masses(sp, *dp).bulk).epsilon(1e-13));
}

TEST_CASE("dissipation audit on synthetic sequences") {
  const std::vector<double> down{5.0, 4.0, 3.5, 3.49, 1.0};
  const DissipationReport ok = dissipation_audit(down, 0.0);
  CHECK(ok.pass);
  CHECK(ok.max_increase <= 0.0);
  CHECK(!ok.first_violation);

  const std::vector<double> jump{5.0, 4.0, 4.001, 3.0};
  const DissipationReport bad = dissipation_audit(jump, 1e-9);
  CHECK(!bad.pass);
  REQUIRE(bad.first_violation);
  CHECK(*bad.first_violation == 1);
  CHECK(bad.max_increase == doctest::Approx(1e-3));
}

TEST_CASE("trajectory errors: identical, constant offset, non-nested") {
  const auto d = Discretization::create(4, 2);
  const auto base = [&](int n) { return constant(*d, 0.1 * n, -0.2 * n); };
  const Trajectory ref = synthetic(d, Model::LiuWu, 0.1, 4, base);
  const TrajectoryErrors same = trajectory_errors(ref, ref);
  CHECK(same.linf_l2_bulk == 0.0);
  CHECK(same.l2_h1_bulk == 0.0);
  CHECK(same.linf_l2_surface == 0.0);
  CHECK(same.l2_h1_surface == 0.0);

  const double c = 0.3;
  const Trajectory off = synthetic(d, Model::LiuWu, 0.1, 4, [&](int n) {
    SystemState s = base(n);
    s.u.array() += c;
    s.p.array() += c;
    return s;
  });
  const TrajectoryErrors e = trajectory_errors(off, ref);
  CHECK(e.linf_l2_bulk == doctest::Approx(c).epsilon(1e-13));
  CHECK(e.linf_l2_surface == doctest::Approx(2.0 * c).epsilon(1e-13));
  // right-endpoint rule over the 4 steps of length 0.1 (the t = 0 term carries no weight)
  CHECK(e.l2_h1_bulk == doctest::Approx(std::sqrt(0.4 * c * c)).epsilon(1e-13));
  CHECK(e.l2_h1_surface == doctest::Approx(std::sqrt(0.4 * 4.0 * c * c)).epsilon(1e-13));

  // coarse τ = 0.2 against the τ = 0.1 reference
  const Trajectory coarse = synthetic(d, Model::LiuWu, 0.2, 2, [&](int n) { return base(2 * n); });
  CHECK(trajectory_errors(coarse, ref).linf_l2_bulk < 1e-15);

  const Trajectory odd = synthetic(d, Model::LiuWu, 0.15, 2, base);
  CHECK_THROWS_AS(trajectory_errors(odd, ref), InvalidArgument);
}

TEST_CASE("trajectory errors restrict finer references by nodal injection") {
  const auto coarse_d = Discretization::create(4, 1);
  const auto fine_d = Discretization::create(4, 4);
  const auto fine_bulk = Discretization::create(8, 2);
  const Trajectory c = synthetic(coarse_d, Model::AllenCahn, 0.1, 2,
                                 [&](int) { return constant(*coarse_d, 0.5, 0.5); });
  const Trajectory f =
      synthetic(fine_d, Model::AllenCahn, 0.1, 2, [&](int) { return constant(*fine_d, 0.5, 0.5); });
  const Trajectory fb = synthetic(fine_bulk, Model::AllenCahn, 0.1, 2,
                                  [&](int) { return constant(*fine_bulk, 0.5, 0.5); });
  CHECK(trajectory_errors(c, f).l2_h1_surface < 1e-15);
  CHECK(trajectory_errors(c, fb).l2_h1_bulk < 1e-15);
  CHECK_THROWS_AS(trajectory_errors(f, c), InvalidArgument);
}

TEST_CASE("observed and fitted orders") {
  CHECK(observed_order(0.4, 0.1) == doctest::Approx(2.0));
  const std::vector<double> taus{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errs;
  for (double t : taus) errs.push_back(3.0 * t * t);
  CHECK(fitted_order(taus, errs) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(fitted_order(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  InvalidArgument);
}

TEST_CASE("mass drift and audit on a short simulated trajectory") {
  const auto d = Discretization::create(8);
  ModelConfig cfg;
  cfg.model = Model::GMS;
  cfg.tau = 1e-5;
  cfg.final_time = 2e-4;
  const Trajectory t = simulate(cfg, d, cosine_product(4.0));
  CHECK(t.states.size() == 21u);
  CHECK(t.reports.size() == 20u);
  CHECK(dissipation_audit(t, 1e-9 * std::abs(t.initial_energy)).pass);
  const MassDrift drift = mass_drift(t);
  CHECK(drift.total <= 1e-10);
  CHECK(drift.bulk > 1e-6);
  CHECK(t.energy_series().size() == 21u);
}
