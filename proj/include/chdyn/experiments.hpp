#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "chdyn/simulation.hpp"

namespace chdyn {

/// u0(x, y) = cos(fπx) cos(fπy); f = 4 is the standard phase-separation start.
std::function<double(Point)> cosine_product(double frequency = 4.0);

/// Runs `count` independent jobs on up to `threads` workers. Jobs write to
/// their own result slots, so output order never depends on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

struct ComparisonOptions {
  int cells = 64;
  double final_time = 1e-3;
  int steps = 100;
  SchemeOrder order = SchemeOrder::First;
  double epsilon = 0.02;
  double delta = 0.02;
  double sigma = 1.0;
  double kappa = 1.0;
  int boundary_factor = 1;
  NewtonSettings newton;
  int threads = 1;
};

struct ModelRun {
  Model model = Model::Neumann;
  Trajectory trajectory;
  DissipationReport audit;
  MassDrift drift;
};

/// All four boundary models from the same cosine start; one run per model.
std::vector<ModelRun> run_model_comparison(const ComparisonOptions& options);

struct EllSweepOptions {
  ModelConfig cfg;  ///< model, parameters, τ and T of the coarse runs
  int cells = 16;
  int boundary_factor = 1;
  std::vector<int> ells{1, 2, 4, 8};
  double reference_tau = 0.0;  ///< ℓ = 1 reference on the same mesh
  NewtonSettings newton;
  int threads = 1;
  double initial_frequency = 4.0;
};

struct EllSweepRow {
  int ell = 1;
  TrajectoryErrors errors;
  DissipationReport audit;
  MassDrift drift;
};

std::vector<EllSweepRow> run_ell_sweep(const EllSweepOptions& options);

struct FittedOrders {
  double linf_l2_bulk = 0.0;
  double l2_h1_bulk = 0.0;
  double linf_l2_surface = 0.0;
  double l2_h1_surface = 0.0;
};

struct OrderStudyOptions {
  ModelConfig cfg;  ///< τ is ignored; `taus` are used instead
  int cells = 16;
  std::vector<double> taus;
  std::vector<int> boundary_factors{1};
  double reference_tau = 0.0;
  /// Boundary refinement of the cross-mesh reference; 0 skips it.
  int reference_factor = 0;
  NewtonSettings newton;
  int threads = 1;
  double initial_frequency = 4.0;
};

struct OrderStudyRow {
  int boundary_factor = 1;
  double tau = 0.0;
  TrajectoryErrors same_mesh;              ///< vs fine-τ run on the same mesh
  std::optional<TrajectoryErrors> finest;  ///< vs fine-τ run on the finest boundary
  std::optional<FittedOrders> observed;    ///< log₂ ratio to the previous τ
  DissipationReport audit;
  MassDrift drift;
};

struct OrderStudy {
  std::vector<OrderStudyRow> rows;
  /// Least-squares orders of the same-mesh errors, per boundary factor.
  std::map<int, FittedOrders> fitted;
};

OrderStudy run_temporal_order_study(const OrderStudyOptions& options);

}  // namespace chdyn
