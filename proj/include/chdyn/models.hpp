#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chdyn/fem.hpp"
#include "chdyn/potential.hpp"
#include "chdyn/solver.hpp"

namespace chdyn {

enum class Model { Neumann, AllenCahn, LiuWu, GMS };
enum class SchemeOrder { First, SecondCN };

std::string to_string(Model model);
std::string to_string(SchemeOrder order);
Model parse_model(std::string_view text);
SchemeOrder parse_order(std::string_view text);

/// Models with a boundary phase p and multiplier λ.
inline bool has_boundary(Model m) { return m != Model::Neumann; }
/// Models with an independent surface chemical potential (w_Γ or r).
inline bool has_surface_potential(Model m) { return m == Model::LiuWu || m == Model::GMS; }
/// GMS carries the second multiplier μ coupling w and r.
inline bool has_flux_multiplier(Model m) { return m == Model::GMS; }

struct ModelConfig {
  Model model = Model::Neumann;
  SchemeOrder order = SchemeOrder::First;
  double epsilon = 0.02;  ///< bulk interaction length
  double delta = 0.02;    ///< surface interaction length
  double sigma = 1.0;     ///< bulk dissipation
  double kappa = 1.0;     ///< surface dissipation
  double tau = 1e-5;      ///< time step
  int ell = 1;            ///< boundary substeps per step (first order only)
  double final_time = 1e-3;
  PotentialSplit bulk_potential = double_well();
  PotentialSplit surface_potential = double_well();

  /// Throws InvalidArgument on non-positive parameters, ℓ < 1, ℓ > 1 for the
  /// second-order scheme or for models without boundary substepping, and a
  /// non-double-well potential for the second-order scheme.
  void validate() const;
  /// Number of steps T/τ; throws unless T is an integer multiple of τ.
  [[nodiscard]] int num_steps() const;
};

/// Unknowns at one time level. Boundary fields are empty for Neumann.
///
/// `surface_potential` holds w_Γ (Liu–Wu) or r (GMS). With ℓ > 1 the
/// intermediate boundary values p^{n+j/ℓ}, j = 1..ℓ-1, are kept in
/// `p_substeps` (and the matching surface potentials for Liu–Wu).
struct SystemState {
  int step = 0;
  Vector u;
  Vector w;
  Vector p;
  Vector surface_potential;
  Vector lambda;
  Vector mu;
  std::vector<Vector> p_substeps;
  std::vector<Vector> surface_potential_substeps;
};

/// Max-norm of the trace constraint T_u u - T_p p (0 for Neumann).
double constraint_violation(const SystemState& s, const Discretization& d);
/// Max-norm of T_u w - T_p r for GMS (0 otherwise).
double potential_constraint_violation(const SystemState& s, const Discretization& d);

/// Nonlinear one-step system of a (model, order, ℓ) scheme in block form.
///
/// Unknowns are endpoint values at t^{n+1}, stacked as
/// [u | w | p_1..p_ℓ | q_1..q_ℓ | λ | μ] where q is the surface potential;
/// blocks absent from the model are empty. Equation rows follow the same
/// ordering: bulk balance, chemical potential, boundary balance(s), boundary
/// potential(s), trace constraint, potential trace constraint.
class StepSystem {
 public:
  StepSystem(const ModelConfig& cfg, const Discretization& disc, const SystemState& previous);

  [[nodiscard]] Eigen::Index size() const { return total_; }
  [[nodiscard]] Vector residual(const Vector& x) const;
  [[nodiscard]] SparseMatrix jacobian(const Vector& x) const;
  [[nodiscard]] Vector initial_guess() const;
  [[nodiscard]] Vector pack(const SystemState& candidate) const;
  [[nodiscard]] SystemState unpack(const Vector& x) const;
  [[nodiscard]] std::string block_name(Eigen::Index i) const;

 private:
  [[nodiscard]] double theta() const { return cfg_.order == SchemeOrder::First ? 1.0 : 0.5; }
  [[nodiscard]] Eigen::Index p_offset(int j) const { return off_p_ + j * np_; }
  [[nodiscard]] Eigen::Index q_offset(int j) const { return off_q_ + j * np_; }

  const ModelConfig& cfg_;
  const Discretization& disc_;
  const SystemState& prev_;
  int substeps_ = 1;
  Eigen::Index nu_ = 0, np_ = 0, nl_ = 0;
  Eigen::Index off_u_ = 0, off_w_ = 0, off_p_ = 0, off_q_ = 0, off_l_ = 0, off_m_ = 0;
  Eigen::Index total_ = 0;
};

SystemState step_first_order(const ModelConfig& cfg, const Discretization& disc,
                             const SystemState& state, const NewtonSettings& settings = {},
                             NewtonResult* info = nullptr, NewtonWorkspace* workspace = nullptr);

/// First-order scheme with ℓ boundary substeps of size τ/ℓ sharing λ^{n+1}
/// (Allen–Cahn and Liu–Wu).
SystemState step_first_order_substepped(const ModelConfig& cfg, const Discretization& disc,
                                        const SystemState& state,
                                        const NewtonSettings& settings = {},
                                        NewtonResult* info = nullptr,
                                        NewtonWorkspace* workspace = nullptr);

/// Crank–Nicolson type scheme with the secant nonlinearity. Requires w^n
/// (and the surface potential for Liu–Wu/GMS) in `state`.
SystemState step_second_order(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const NewtonSettings& settings = {},
                              NewtonResult* info = nullptr, NewtonWorkspace* workspace = nullptr);

/// Dispatches on cfg.order and cfg.ell.
SystemState advance(const ModelConfig& cfg, const Discretization& disc, const SystemState& state,
                    const NewtonSettings& settings = {}, NewtonResult* info = nullptr,
                    NewtonWorkspace* workspace = nullptr);

struct InitialPotentials {
  Vector w;
  Vector surface_potential;
  Vector lambda;
  Vector mu;
};

/// Solves the algebraic part of the semi-discrete system at t = 0 with u0, p0
/// fixed, together with the time derivatives it is coupled to.
InitialPotentials initial_chemical_potentials(const ModelConfig& cfg, const Discretization& disc,
                                              const Vector& u0, const Vector& p0);

/// Samples of `u0` at the boundary nodes, moved by the smallest correction in
/// the H¹(Γ) norm that satisfies the discrete trace constraint. On a
/// refined chain this avoids the coarse-edge kinks of the interpolated trace.
Vector consistent_boundary_samples(const Discretization& disc, const Vector& u,
                                   const std::function<double(Point)>& u0);

/// Nodal interpolation of `u0` in the bulk, consistent samples on the boundary,
/// and (for the second-order scheme) the initial chemical potentials.
SystemState consistent_initial_state(const ModelConfig& cfg, const Discretization& disc,
                                     const std::function<double(Point)>& u0);

Vector assemble_step_residual(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const SystemState& candidate);
SparseMatrix assemble_step_jacobian(const ModelConfig& cfg, const Discretization& disc,
                                    const SystemState& state, const SystemState& candidate);

/// Same step as `advance`, solved with dense LU and a finite-difference
/// Jacobian. At most 200 unknowns; test use only.
SystemState dense_oracle_step(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const NewtonSettings& settings = {});

}  // namespace chdyn
