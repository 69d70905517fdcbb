#include "chdyn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "chdyn/errors.hpp"

namespace chdyn {

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

void row(std::ostream& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out << ',';
    out << c;
    first = false;
  }
  out << '\n';
}

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }

}  // namespace

void write_series_csv(std::ostream& out, const Trajectory& traj) {
  out << "step,t,mass_bulk,mass_surf,mass_total,energy_bulk,energy_surf,energy_total,"
         "newton_iters,residual\n";
  const auto& m0 = traj.initial_masses;
  const auto& e0 = traj.initial_energies;
  row(out, {num(0), num(0.0), num(m0.bulk), num(m0.surface), num(m0.total), num(e0.bulk),
            num(e0.surface), num(e0.total), num(0), num(0.0)});
  for (const StepReport& r : traj.reports) {
    row(out, {num(r.step), num(r.step * traj.cfg.tau), num(r.mass_bulk), num(r.mass_surface),
              num(r.mass_total), num(r.energy_bulk), num(r.energy_surface), num(r.energy_after),
              num(r.newton_iterations), num(r.residual_norm)});
  }
}

void write_bulk_snapshot(std::ostream& out, const BulkMesh& mesh, const Vector& values) {
  out << "x,y,value\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    row(out, {num(mesh.vertices[i].x), num(mesh.vertices[i].y),
              num(values[static_cast<Eigen::Index>(i)])});
  }
}

void write_boundary_snapshot(std::ostream& out, const BoundaryMesh& bmesh, const Vector& values) {
  out << "s,x,y,value\n";
  for (int k = 0; k < bmesh.num_nodes(); ++k) {
    const Point p = bmesh.position(k);
    row(out, {num(bmesh.nodes[k]), num(p.x), num(p.y), num(values[k])});
  }
}

void write_snapshots(const std::filesystem::path& dir, const SystemState& state,
                     const Discretization& disc) {
  const std::string tag = std::to_string(state.step);
  write_file_atomic(dir / ("u_" + tag + ".csv"),
                    [&](std::ostream& o) { write_bulk_snapshot(o, disc.bulk, state.u); });
  if (state.w.size() == state.u.size()) {
    write_file_atomic(dir / ("w_" + tag + ".csv"),
                      [&](std::ostream& o) { write_bulk_snapshot(o, disc.bulk, state.w); });
  }
  if (state.p.size() > 0) {
    write_file_atomic(dir / ("p_" + tag + ".csv"),
                      [&](std::ostream& o) { write_boundary_snapshot(o, disc.boundary, state.p); });
  }
}

void write_order_study_csv(std::ostream& out, const OrderStudy& study) {
  const bool finest = !study.rows.empty() && study.rows.front().finest.has_value();
  out << "boundary_factor,tau,err_linf_l2_u,err_l2_h1_u,err_linf_l2_p,err_l2_h1_p,"
         "order_linf_l2_u,order_l2_h1_u,order_linf_l2_p,order_l2_h1_p,"
         "fitted_linf_l2_u,fitted_l2_h1_u,fitted_linf_l2_p,fitted_l2_h1_p,"
         "energy_dissipative,max_energy_increase";
  if (finest) out << ",finest_err_linf_l2_p,finest_err_l2_h1_p";
  out << '\n';
  for (const OrderStudyRow& r : study.rows) {
    const auto& e = r.same_mesh;
    const FittedOrders& fit = study.fitted.at(r.boundary_factor);
    auto order = [&](double FittedOrders::*field) {
      return r.observed ? num((*r.observed).*field) : std::string();
    };
    out << r.boundary_factor << ',' << num(r.tau) << ',' << num(e.linf_l2_bulk) << ','
        << num(e.l2_h1_bulk) << ',' << num(e.linf_l2_surface) << ',' << num(e.l2_h1_surface) << ','
        << order(&FittedOrders::linf_l2_bulk) << ',' << order(&FittedOrders::l2_h1_bulk) << ','
        << order(&FittedOrders::linf_l2_surface) << ',' << order(&FittedOrders::l2_h1_surface)
        << ',' << num(fit.linf_l2_bulk) << ',' << num(fit.l2_h1_bulk) << ','
        << num(fit.linf_l2_surface) << ',' << num(fit.l2_h1_surface) << ','
        << (r.audit.pass ? 1 : 0) << ',' << num(r.audit.max_increase);
    if (finest && r.finest) {
      out << ',' << num(r.finest->linf_l2_surface) << ',' << num(r.finest->l2_h1_surface);
    }
    out << '\n';
  }
}

void write_ell_sweep_csv(std::ostream& out, const std::vector<EllSweepRow>& rows) {
  out << "ell,err_linf_l2_u,err_l2_h1_u,err_linf_l2_p,err_l2_h1_p,energy_dissipative,"
         "max_energy_increase,mass_drift_bulk,mass_drift_surf\n";
  for (const EllSweepRow& r : rows) {
    row(out, {num(r.ell), num(r.errors.linf_l2_bulk), num(r.errors.l2_h1_bulk),
              num(r.errors.linf_l2_surface), num(r.errors.l2_h1_surface), num(r.audit.pass ? 1 : 0),
              num(r.audit.max_increase), num(r.drift.bulk), num(r.drift.surface)});
  }
}

}  // namespace chdyn
