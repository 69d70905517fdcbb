#include "chdyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "chdyn/errors.hpp"

namespace chdyn {

const SystemState* Trajectory::find_step(int step) const {
  auto it = std::lower_bound(states.begin(), states.end(), step,
                             [](const SystemState& s, int v) { return s.step < v; });
  if (it == states.end() || it->step != step) return nullptr;
  return &*it;
}

std::vector<double> Trajectory::energy_series() const {
  std::vector<double> e;
  e.reserve(reports.size() + 1);
  e.push_back(initial_energy);
  for (const auto& r : reports) e.push_back(r.energy_after);
  return e;
}

Masses masses(const SystemState& state, const Discretization& disc) {
  Masses m;
  if (state.u.size() != disc.num_bulk()) throw InvalidArgument("masses: u has wrong length");
  m.bulk = disc.lumped_mass.dot(state.u);
  if (state.p.size() > 0) {
    if (state.p.size() != disc.num_boundary()) throw InvalidArgument("masses: p has wrong length");
    m.surface = disc.boundary_lumped_mass.dot(state.p);
  }
  m.total = m.bulk + m.surface;
  return m;
}

Energies energies(const SystemState& state, const ModelConfig& cfg, const Discretization& disc) {
  Energies e;
  const Vector& u = state.u;
  if (u.size() != disc.num_bulk()) throw InvalidArgument("energies: u has wrong length");
  double potential = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    potential += disc.lumped_mass[i] * cfg.bulk_potential.value(u[i]);
  }
  e.bulk = 0.5 * cfg.epsilon * u.dot(disc.stiffness * u) + potential / cfg.epsilon;
  if (has_boundary(cfg.model) && state.p.size() > 0) {
    const Vector& p = state.p;
    if (p.size() != disc.num_boundary()) throw InvalidArgument("energies: p has wrong length");
    double surf = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      surf += disc.boundary_lumped_mass[i] * cfg.surface_potential.value(p[i]);
    }
    e.surface = 0.5 * cfg.delta * cfg.kappa * p.dot(disc.boundary_stiffness * p) + surf / cfg.delta;
  }
  e.total = e.bulk + e.surface;
  return e;
}

DissipationReport dissipation_audit(std::span<const double> energy, double tol) {
  DissipationReport r;
  r.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < energy.size(); ++n) {
    const double inc = energy[n + 1] - energy[n];
    r.max_increase = std::max(r.max_increase, inc);
    if (inc > tol && !r.first_violation) r.first_violation = static_cast<int>(n);
  }
  if (energy.size() < 2) r.max_increase = 0.0;
  r.pass = !r.first_violation.has_value();
  return r;
}

DissipationReport dissipation_audit(const Trajectory& traj, double tol) {
  const auto e = traj.energy_series();
  return dissipation_audit(std::span<const double>(e), tol);
}

MassDrift mass_drift(const Trajectory& traj) {
  const Masses& m0 = traj.initial_masses;
  const bool boundary = has_boundary(traj.cfg.model);
  const double scale_bulk = std::max(std::abs(m0.bulk), 1.0);
  const double scale_surf = std::max(std::abs(m0.surface), 4.0);
  const double scale_total = std::max(std::abs(m0.total), boundary ? 5.0 : 1.0);
  MassDrift d;
  for (const auto& r : traj.reports) {
    d.bulk = std::max(d.bulk, std::abs(r.mass_bulk - m0.bulk) / scale_bulk);
    d.surface = std::max(d.surface, std::abs(r.mass_surface - m0.surface) / scale_surf);
    d.total = std::max(d.total, std::abs(r.mass_total - m0.total) / scale_total);
  }
  return d;
}

std::vector<int> nested_bulk_map(const BulkMesh& coarse, const BulkMesh& fine) {
  auto key = [](const Point& p) {
    return std::pair<long long, long long>(std::llround(p.x * 1e9), std::llround(p.y * 1e9));
  };
  std::map<std::pair<long long, long long>, int> lookup;
  for (int i = 0; i < fine.num_vertices(); ++i) lookup.emplace(key(fine.vertices[i]), i);
  std::vector<int> map(coarse.num_vertices());
  for (int i = 0; i < coarse.num_vertices(); ++i) {
    auto it = lookup.find(key(coarse.vertices[i]));
    if (it == lookup.end()) {
      throw InvalidArgument("nested_bulk_map: bulk meshes are not nested");
    }
    map[i] = it->second;
  }
  return map;
}

std::vector<int> nested_boundary_map(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
  if (std::abs(coarse.perimeter() - fine.perimeter()) > 1e-12) {
    throw InvalidArgument("nested_boundary_map: boundary chains have different lengths");
  }
  std::vector<int> map(coarse.num_nodes());
  for (int k = 0; k < coarse.num_nodes(); ++k) {
    const double s = coarse.nodes[k];
    auto it = std::lower_bound(fine.nodes.begin(), fine.nodes.end(), s - 1e-12);
    if (it == fine.nodes.end() || std::abs(*it - s) > 1e-12) {
      throw InvalidArgument("nested_boundary_map: boundary chains are not nested");
    }
    map[k] = static_cast<int>(it - fine.nodes.begin());
  }
  return map;
}

namespace {

Vector restrict_to(const Vector& v, const std::vector<int>& map) {
  Vector out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = v[map[i]];
  return out;
}

}  // namespace

TrajectoryErrors trajectory_errors(const Trajectory& traj, const Trajectory& ref) {
  if (!traj.disc || !ref.disc) throw InvalidArgument("trajectory_errors: missing discretization");
  if (traj.states.empty() || ref.states.empty()) {
    throw InvalidArgument("trajectory_errors: empty trajectory");
  }
  const double ratio_real = traj.cfg.tau / ref.cfg.tau;
  const long ratio = std::lround(ratio_real);
  if (ratio < 1 || std::abs(ratio_real - ratio) > 1e-9 * ratio_real) {
    throw InvalidArgument("trajectory_errors: reference time grid is not nested");
  }
  const Discretization& dc = *traj.disc;
  const Discretization& dr = *ref.disc;
  const auto bulk_map = nested_bulk_map(dc.bulk, dr.bulk);
  const bool surface = has_boundary(traj.cfg.model) && has_boundary(ref.cfg.model);
  std::vector<int> bnd_map;
  if (surface) bnd_map = nested_boundary_map(dc.boundary, dr.boundary);

  TrajectoryErrors out;
  double sum_bulk = 0.0, sum_surf = 0.0;
  int prev_step = 0;
  for (const SystemState& s : traj.states) {
    const SystemState* r = ref.find_step(static_cast<int>(s.step * ratio));
    if (r == nullptr) {
      std::ostringstream os;
      os << "trajectory_errors: reference has no state at t = " << s.step * traj.cfg.tau;
      throw InvalidArgument(os.str());
    }
    const Vector eu = s.u - restrict_to(r->u, bulk_map);
    const double l2 = eu.dot(dc.mass * eu);
    const double h1 = eu.dot(dc.stiffness * eu);
    out.linf_l2_bulk = std::max(out.linf_l2_bulk, std::sqrt(std::max(l2, 0.0)));
    const double weight = (s.step - prev_step) * traj.cfg.tau;
    sum_bulk += weight * (l2 + h1);
    if (surface) {
      const Vector ep = s.p - restrict_to(r->p, bnd_map);
      const double l2g = ep.dot(dc.boundary_mass * ep);
      const double h1g = ep.dot(dc.boundary_stiffness * ep);
      out.linf_l2_surface = std::max(out.linf_l2_surface, std::sqrt(std::max(l2g, 0.0)));
      sum_surf += weight * (l2g + h1g);
    }
    prev_step = s.step;
  }
  out.l2_h1_bulk = std::sqrt(std::max(sum_bulk, 0.0));
  out.l2_h1_surface = std::sqrt(std::max(sum_surf, 0.0));
  return out;
}

double observed_order(double e1, double e2) { return std::log2(e1 / e2); }

double fitted_order(std::span<const double> steps, std::span<const double> errors) {
  if (steps.size() != errors.size() || steps.size() < 2) {
    throw InvalidArgument("fitted_order: need at least two (step, error) pairs");
  }
  const double n = static_cast<double>(steps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double x = std::log(steps[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace chdyn
