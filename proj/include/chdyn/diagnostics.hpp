#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "chdyn/models.hpp"
#include "chdyn/solver.hpp"

namespace chdyn {

struct Masses {
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};

struct Energies {
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};

/// Time series produced by `simulate`. `states` holds every recorded time
/// level (step indices are in SystemState::step); `reports` has one entry per
/// accepted step.
struct Trajectory {
  ModelConfig cfg;
  std::shared_ptr<const Discretization> disc;
  std::vector<SystemState> states;
  std::vector<StepReport> reports;
  double initial_energy = 0.0;
  Energies initial_energies;
  Masses initial_masses;

  [[nodiscard]] const SystemState* find_step(int step) const;
  /// Total energy at every time level 0..N.
  [[nodiscard]] std::vector<double> energy_series() const;
};

Masses masses(const SystemState& state, const Discretization& disc);

/// Discrete free energies with vertex quadrature for the potentials:
/// E_bulk = ε/2 uᵀKu + 1/ε Σ mᵢ W(uᵢ), E_surf = δκ/2 pᵀK_Γp + 1/δ Σ m_Γ,ᵢ W_Γ(pᵢ).
Energies energies(const SystemState& state, const ModelConfig& cfg, const Discretization& disc);

struct DissipationReport {
  bool pass = true;
  double max_increase = 0.0;
  std::optional<int> first_violation;  ///< index n with E(n+1) - E(n) > tol
};

DissipationReport dissipation_audit(std::span<const double> energy, double tol);
DissipationReport dissipation_audit(const Trajectory& traj, double tol);

/// Largest |m(n) - m(0)| over all steps, relative to max(|m(0)|, measure)
/// where the measure is |Ω| = 1, |Γ| = 4 and |Ω| + |Γ| = 5 respectively
/// (the mass of the pure phase u ≡ 1).
struct MassDrift {
  double bulk = 0.0;
  double surface = 0.0;
  double total = 0.0;
};
MassDrift mass_drift(const Trajectory& traj);

struct TrajectoryErrors {
  double linf_l2_bulk = 0.0;
  double l2_h1_bulk = 0.0;
  double linf_l2_surface = 0.0;
  double l2_h1_surface = 0.0;
};

/// Errors of `traj` against a reference on a nested (finer or equal) time grid
/// and nested spaces. Reference fields are restricted to the coarse nodes;
/// the L²-in-time norm uses the right-endpoint rule with the coarse step.
TrajectoryErrors trajectory_errors(const Trajectory& traj, const Trajectory& ref);

/// Restriction by nodal injection onto the vertices of `coarse`.
std::vector<int> nested_bulk_map(const BulkMesh& coarse, const BulkMesh& fine);
std::vector<int> nested_boundary_map(const BoundaryMesh& coarse, const BoundaryMesh& fine);

/// log₂(e1 / e2): the observed order between consecutive halvings.
double observed_order(double e1, double e2);
/// Least-squares slope of log(error) against log(step).
double fitted_order(std::span<const double> steps, std::span<const double> errors);

}  // namespace chdyn
