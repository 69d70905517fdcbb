#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chdyn/errors.hpp"
#include "chdyn/experiments.hpp"
#include "chdyn/simulation.hpp"

namespace py = pybind11;
using namespace chdyn;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bulk-surface finite element solver for Cahn-Hilliard with dynamic boundary conditions";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<InvalidState>(m, "InvalidState", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<StepFailure>(m, "StepFailure", PyExc_RuntimeError);

  py::class_<BulkMesh>(m, "BulkMesh")
      .def_property_readonly("vertices",
                             [](const BulkMesh& b) {
                               Eigen::MatrixX2d out(b.num_vertices(), 2);
                               for (int i = 0; i < b.num_vertices(); ++i) {
                                 out(i, 0) = b.vertices[i].x;
                                 out(i, 1) = b.vertices[i].y;
                               }
                               return out;
                             })
      .def_property_readonly("triangles",
                             [](const BulkMesh& b) {
                               Eigen::MatrixX3i out(b.num_triangles(), 3);
                               for (int t = 0; t < b.num_triangles(); ++t) {
                                 for (int k = 0; k < 3; ++k) out(t, k) = b.triangles[t][k];
                               }
                               return out;
                             })
      .def_readonly("boundary_vertices", &BulkMesh::boundary_vertices)
      .def_readonly("cells_per_side", &BulkMesh::cells_per_side)
      .def_property_readonly("num_vertices", &BulkMesh::num_vertices)
      .def_property_readonly("num_triangles", &BulkMesh::num_triangles)
      .def_property_readonly("mesh_size", &BulkMesh::mesh_size)
      .def("signed_area", &BulkMesh::signed_area);

  py::class_<BoundaryMesh>(m, "BoundaryMesh")
      .def_readonly("nodes", &BoundaryMesh::nodes)
      .def_readonly("factor", &BoundaryMesh::factor)
      .def_readonly("coarse_edges", &BoundaryMesh::coarse_edges)
      .def_property_readonly("num_nodes", &BoundaryMesh::num_nodes)
      .def_property_readonly("perimeter", &BoundaryMesh::perimeter)
      .def("edge_length", &BoundaryMesh::edge_length)
      .def("position", [](const BoundaryMesh& b, int k) {
        const Point p = b.position(k);
        return py::make_tuple(p.x, p.y);
      });

  m.def("build_unit_square_crisscross", &build_unit_square_crisscross, py::arg("n"));
  m.def("extract_boundary_chain", &extract_boundary_chain, py::arg("mesh"));
  m.def("refine_boundary_chain", &refine_boundary_chain, py::arg("boundary"), py::arg("factor"));

  py::class_<Discretization, std::shared_ptr<Discretization>>(m, "Discretization")
      .def_static(
          "create",
          [](int cells, int factor) {
            return std::const_pointer_cast<Discretization>(Discretization::create(cells, factor));
          },
          py::arg("cells"), py::arg("boundary_factor") = 1)
      .def_readonly("bulk", &Discretization::bulk)
      .def_readonly("boundary", &Discretization::boundary)
      .def_readonly("mass", &Discretization::mass)
      .def_readonly("stiffness", &Discretization::stiffness)
      .def_readonly("lumped_mass", &Discretization::lumped_mass)
      .def_readonly("boundary_mass", &Discretization::boundary_mass)
      .def_readonly("boundary_stiffness", &Discretization::boundary_stiffness)
      .def_readonly("boundary_lumped_mass", &Discretization::boundary_lumped_mass)
      .def_property_readonly("trace_bulk", [](const Discretization& d) { return d.trace.bulk; })
      .def_property_readonly("trace_boundary",
                             [](const Discretization& d) { return d.trace.boundary; })
      .def_property_readonly("num_bulk", &Discretization::num_bulk)
      .def_property_readonly("num_boundary", &Discretization::num_boundary)
      .def_property_readonly("num_multiplier", &Discretization::num_multiplier);

  py::enum_<Model>(m, "Model")
      .value("Neumann", Model::Neumann)
      .value("AllenCahn", Model::AllenCahn)
      .value("LiuWu", Model::LiuWu)
      .value("GMS", Model::GMS);
  py::enum_<SchemeOrder>(m, "SchemeOrder")
      .value("First", SchemeOrder::First)
      .value("SecondCN", SchemeOrder::SecondCN);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("model", &ModelConfig::model)
      .def_readwrite("order", &ModelConfig::order)
      .def_readwrite("epsilon", &ModelConfig::epsilon)
      .def_readwrite("delta", &ModelConfig::delta)
      .def_readwrite("sigma", &ModelConfig::sigma)
      .def_readwrite("kappa", &ModelConfig::kappa)
      .def_readwrite("tau", &ModelConfig::tau)
      .def_readwrite("ell", &ModelConfig::ell)
      .def_readwrite("final_time", &ModelConfig::final_time)
      .def("validate", &ModelConfig::validate)
      .def("num_steps", &ModelConfig::num_steps);

  py::class_<NewtonSettings>(m, "NewtonSettings")
      .def(py::init<>())
      .def_readwrite("abs_tol", &NewtonSettings::abs_tol)
      .def_readwrite("rel_tol", &NewtonSettings::rel_tol)
      .def_readwrite("max_iters", &NewtonSettings::max_iters)
      .def_readwrite("damping", &NewtonSettings::damping)
      .def_readwrite("refresh_ratio", &NewtonSettings::refresh_ratio);

  py::class_<SystemState>(m, "SystemState")
      .def(py::init<>())
      .def_readwrite("step", &SystemState::step)
      .def_readwrite("u", &SystemState::u)
      .def_readwrite("w", &SystemState::w)
      .def_readwrite("p", &SystemState::p)
      .def_readwrite("surface_potential", &SystemState::surface_potential)
      .def_readwrite("lambda_", &SystemState::lambda)
      .def_readwrite("mu", &SystemState::mu);

  py::class_<Masses>(m, "Masses")
      .def_readonly("bulk", &Masses::bulk)
      .def_readonly("surface", &Masses::surface)
      .def_readonly("total", &Masses::total);
  py::class_<Energies>(m, "Energies")
      .def_readonly("bulk", &Energies::bulk)
      .def_readonly("surface", &Energies::surface)
      .def_readonly("total", &Energies::total);
  py::class_<MassDrift>(m, "MassDrift")
      .def_readonly("bulk", &MassDrift::bulk)
      .def_readonly("surface", &MassDrift::surface)
      .def_readonly("total", &MassDrift::total);
  py::class_<DissipationReport>(m, "DissipationReport")
      .def_readonly("passed", &DissipationReport::pass)
      .def_readonly("max_increase", &DissipationReport::max_increase)
      .def_readonly("first_violation", &DissipationReport::first_violation);
  py::class_<TrajectoryErrors>(m, "TrajectoryErrors")
      .def_readonly("linf_l2_bulk", &TrajectoryErrors::linf_l2_bulk)
      .def_readonly("l2_h1_bulk", &TrajectoryErrors::l2_h1_bulk)
      .def_readonly("linf_l2_surface", &TrajectoryErrors::linf_l2_surface)
      .def_readonly("l2_h1_surface", &TrajectoryErrors::l2_h1_surface);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("initial_energy", &Trajectory::initial_energy)
      .def_readonly("initial_masses", &Trajectory::initial_masses)
      .def("energy_series", &Trajectory::energy_series)
      .def_property_readonly("newton_iterations", [](const Trajectory& t) {
        std::vector<int> out;
        for (const auto& r : t.reports) out.push_back(r.newton_iterations);
        return out;
      });

  m.def("masses", &masses, py::arg("state"), py::arg("disc"));
  m.def("energies", &energies, py::arg("state"), py::arg("cfg"), py::arg("disc"));
  m.def("cn_slope", &cn_slope, py::arg("a"), py::arg("b"));
  m.def(
      "consistent_initial_state",
      [](const ModelConfig& cfg, const Discretization& disc,
         const std::function<double(double, double)>& u0) {
        return consistent_initial_state(cfg, disc, [&](Point p) { return u0(p.x, p.y); });
      },
      py::arg("cfg"), py::arg("disc"), py::arg("u0"));
  m.def(
      "cosine_initial_state",
      [](const ModelConfig& cfg, const Discretization& disc, double frequency) {
        return consistent_initial_state(cfg, disc, cosine_product(frequency));
      },
      py::arg("cfg"), py::arg("disc"), py::arg("frequency") = 4.0);
  m.def(
      "advance",
      [](const ModelConfig& cfg, const Discretization& disc, const SystemState& s,
         const NewtonSettings& settings) { return advance(cfg, disc, s, settings); },
      py::arg("cfg"), py::arg("disc"), py::arg("state"), py::arg("settings") = NewtonSettings{});
  m.def(
      "simulate",
      [](const ModelConfig& cfg, std::shared_ptr<Discretization> disc, const SystemState& initial,
         const NewtonSettings& settings, int record_stride) {
        SimulationOptions o;
        o.newton = settings;
        o.record_stride = record_stride;
        py::gil_scoped_release release;
        return simulate(cfg, disc, initial, o);
      },
      py::arg("cfg"), py::arg("disc"), py::arg("initial"), py::arg("settings") = NewtonSettings{},
      py::arg("record_stride") = 1);
  m.def(
      "dissipation_audit",
      [](const Trajectory& t, double tol) { return dissipation_audit(t, tol); },
      py::arg("trajectory"), py::arg("tol"));
  m.def("mass_drift", &mass_drift, py::arg("trajectory"));
  m.def("trajectory_errors", &trajectory_errors, py::arg("trajectory"), py::arg("reference"));
  m.def("observed_order", &observed_order, py::arg("e1"), py::arg("e2"));

  py::class_<ModelRun>(m, "ModelRun")
      .def_readonly("model", &ModelRun::model)
      .def_readonly("trajectory", &ModelRun::trajectory)
      .def_readonly("audit", &ModelRun::audit)
      .def_readonly("drift", &ModelRun::drift);
  m.def(
      "run_model_comparison",
      [](int cells, double final_time, int steps, SchemeOrder order, int threads) {
        ComparisonOptions o;
        o.cells = cells;
        o.final_time = final_time;
        o.steps = steps;
        o.order = order;
        o.threads = threads;
        py::gil_scoped_release release;
        return run_model_comparison(o);
      },
      py::arg("cells") = 64, py::arg("final_time") = 1e-3, py::arg("steps") = 100,
      py::arg("order") = SchemeOrder::First, py::arg("threads") = 1);
}
