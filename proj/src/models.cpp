#include "chdyn/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chdyn/errors.hpp"

namespace chdyn {

namespace {

using Index = Eigen::Index;
using Triplets = std::vector<Eigen::Triplet<double>>;

constexpr double kConsistencyTol = 1e-8;

void add_block(Triplets& t, Index row, Index col, const SparseMatrix& m, double scale) {
  if (scale == 0.0) return;
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      t.emplace_back(row + it.row(), col + it.col(), scale * it.value());
    }
  }
}

void add_transposed(Triplets& t, Index row, Index col, const SparseMatrix& m, double scale) {
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      t.emplace_back(row + it.col(), col + it.row(), scale * it.value());
    }
  }
}

void add_diagonal(Triplets& t, Index row, Index col, const Vector& d) {
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(row + i, col + i, d[i]);
}

Vector apply(const PotentialSplit::Fn& f, const Vector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  return out;
}

bool sized(const Vector& v, Index n) { return v.size() == n; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

}  // namespace

std::string to_string(Model model) {
  switch (model) {
    case Model::Neumann:
      return "neumann";
    case Model::AllenCahn:
      return "allen_cahn";
    case Model::LiuWu:
      return "liu_wu";
    case Model::GMS:
      return "gms";
  }
  return "unknown";
}

std::string to_string(SchemeOrder order) {
  return order == SchemeOrder::First ? "first" : "second";
}

Model parse_model(std::string_view text) {
  const std::string s = lower(text);
  if (s == "neumann") return Model::Neumann;
  if (s == "allen_cahn" || s == "ac") return Model::AllenCahn;
  if (s == "liu_wu" || s == "lw") return Model::LiuWu;
  if (s == "gms" || s == "goldstein") return Model::GMS;
  throw InvalidArgument("unknown model '" + std::string(text) + "'");
}

SchemeOrder parse_order(std::string_view text) {
  const std::string s = lower(text);
  if (s == "first" || s == "1") return SchemeOrder::First;
  if (s == "second" || s == "2" || s == "cn" || s == "second_cn") return SchemeOrder::SecondCN;
  throw InvalidArgument("unknown scheme order '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string("ModelConfig: ") + name + " must be positive");
    }
  };
  positive(epsilon, "epsilon");
  positive(delta, "delta");
  positive(sigma, "sigma");
  positive(kappa, "kappa");
  positive(tau, "tau");
  positive(final_time, "final_time");
  if (ell < 1) throw InvalidArgument("ModelConfig: ell must be >= 1");
  if (ell > 1 && order == SchemeOrder::SecondCN) {
    throw InvalidArgument("ModelConfig: ell > 1 is only available for the first-order scheme");
  }
  if (ell > 1 && model != Model::AllenCahn && model != Model::LiuWu) {
    throw InvalidArgument("ModelConfig: boundary substepping requires allen_cahn or liu_wu");
  }
  if (order == SchemeOrder::SecondCN &&
      (!bulk_potential.is_double_well() || !surface_potential.is_double_well())) {
    throw InvalidArgument(
        "ModelConfig: the second-order scheme requires the double-well potential");
  }
}

int ModelConfig::num_steps() const {
  const double ratio = final_time / tau;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("ModelConfig: final_time must be an integer multiple of tau");
  }
  return static_cast<int>(steps);
}

double constraint_violation(const SystemState& s, const Discretization& d) {
  if (s.p.size() == 0) return 0.0;
  return (d.trace.bulk * s.u - d.trace.boundary * s.p).lpNorm<Eigen::Infinity>();
}

double potential_constraint_violation(const SystemState& s, const Discretization& d) {
  if (s.surface_potential.size() == 0 || s.w.size() == 0) return 0.0;
  return (d.trace.bulk * s.w - d.trace.boundary * s.surface_potential).lpNorm<Eigen::Infinity>();
}

// ---------------------------------------------------------------------------

StepSystem::StepSystem(const ModelConfig& cfg, const Discretization& disc,
                       const SystemState& previous)
    : cfg_(cfg), disc_(disc), prev_(previous) {
  cfg_.validate();
  substeps_ = cfg.ell;
  nu_ = disc.num_bulk();
  np_ = has_boundary(cfg.model) ? disc.num_boundary() : 0;
  nl_ = has_boundary(cfg.model) ? disc.num_multiplier() : 0;
  const int nq = has_surface_potential(cfg.model) ? substeps_ : 0;

  off_u_ = 0;
  off_w_ = nu_;
  off_p_ = 2 * nu_;
  off_q_ = off_p_ + (has_boundary(cfg.model) ? substeps_ * np_ : 0);
  off_l_ = off_q_ + nq * np_;
  off_m_ = off_l_ + nl_;
  total_ = off_m_ + (has_flux_multiplier(cfg.model) ? nl_ : 0);

  if (!sized(prev_.u, nu_)) {
    throw InvalidArgument("StepSystem: u has length " + std::to_string(prev_.u.size()) +
                          ", expected " + std::to_string(nu_));
  }
  if (has_boundary(cfg.model)) {
    if (!sized(prev_.p, np_)) throw InvalidArgument("StepSystem: p has wrong length");
    const double viol = constraint_violation(prev_, disc_);
    if (viol > kConsistencyTol) {
      std::ostringstream os;
      os << "StepSystem: state violates the trace constraint (" << viol << ")";
      throw InvalidState(os.str());
    }
  }
  if (cfg.order == SchemeOrder::SecondCN) {
    if (!sized(prev_.w, nu_)) {
      throw InvalidState("StepSystem: the second-order scheme needs the chemical potential w^n");
    }
    if (has_surface_potential(cfg.model) && !sized(prev_.surface_potential, np_)) {
      throw InvalidState("StepSystem: the second-order scheme needs the surface potential");
    }
    if (cfg.model == Model::GMS && potential_constraint_violation(prev_, disc_) > kConsistencyTol) {
      throw InvalidState("StepSystem: r^n is not the trace of w^n");
    }
  }
}

std::string StepSystem::block_name(Index i) const {
  if (i < off_w_) return "u";
  if (i < off_p_) return "w";
  if (i < off_q_) return "p[" + std::to_string((i - off_p_) / std::max<Index>(np_, 1)) + "]";
  if (i < off_l_) return "q[" + std::to_string((i - off_q_) / std::max<Index>(np_, 1)) + "]";
  if (i < off_m_) return "lambda";
  return "mu";
}

Vector StepSystem::residual(const Vector& x) const {
  if (x.size() != total_) throw InvalidArgument("StepSystem::residual: wrong length");
  const Model model = cfg_.model;
  const bool first = cfg_.order == SchemeOrder::First;
  const double tau = cfg_.tau;
  const double eps = cfg_.epsilon;

  const auto& M = disc_.mass;
  const auto& K = disc_.stiffness;
  const auto& Mg = disc_.boundary_mass;
  const auto& Kg = disc_.boundary_stiffness;
  const auto& Tu = disc_.trace.bulk;
  const auto& Tp = disc_.trace.boundary;

  Vector r = Vector::Zero(total_);
  const auto u1 = x.segment(off_u_, nu_);
  const auto w1 = x.segment(off_w_, nu_);
  const Vector& u0 = prev_.u;
  const Vector ustar = first ? Vector(u1) : Vector(0.5 * (u0 + u1));
  const Vector wstar = first ? Vector(w1) : Vector(0.5 * (prev_.w + w1));

  Vector bulk_nl(nu_);
  for (Index i = 0; i < nu_; ++i) {
    bulk_nl[i] = first ? cfg_.bulk_potential.convex_derivative(u1[i]) -
                             cfg_.bulk_potential.concave_derivative(u0[i])
                       : cn_slope(u0[i], u1[i]);
  }

  Vector ra = M * (u1 - u0) + (tau * cfg_.sigma) * (K * wstar);
  Vector rb = eps * (K * ustar) + (1.0 / eps) * disc_.lumped_mass.cwiseProduct(bulk_nl) - M * wstar;
  if (has_boundary(model)) {
    rb -= eps * (Tu.transpose() * x.segment(off_l_, nl_));
  }
  if (has_flux_multiplier(model)) {
    ra -= tau * (Tu.transpose() * x.segment(off_m_, nl_));
  }
  r.segment(off_u_, nu_) = ra;
  r.segment(off_w_, nu_) = rb;
  if (!has_boundary(model)) return r;

  const auto lambda = x.segment(off_l_, nl_);
  const double sub_tau = tau / substeps_;
  const double dk = cfg_.delta * cfg_.kappa;
  const auto& wg = cfg_.surface_potential;

  for (int j = 0; j < substeps_; ++j) {
    const Vector pj = x.segment(p_offset(j), np_);
    const Vector pprev = j == 0 ? prev_.p : Vector(x.segment(p_offset(j - 1), np_));
    const Vector pstar = first ? pj : Vector(0.5 * (pprev + pj));
    Vector surf_nl(np_);
    for (Index i = 0; i < np_; ++i) {
      surf_nl[i] = first ? wg.convex_derivative(pj[i]) - wg.concave_derivative(pprev[i])
                         : cn_slope(pprev[i], pj[i]);
    }
    const Vector potential_terms =
        dk * (Kg * pstar) + (1.0 / cfg_.delta) * disc_.boundary_lumped_mass.cwiseProduct(surf_nl);

    if (model == Model::AllenCahn) {
      r.segment(p_offset(j), np_) = Mg * (pj - pprev) + sub_tau * potential_terms +
                                    (sub_tau * eps) * (Tp.transpose() * lambda);
    } else {
      const Vector qj = x.segment(q_offset(j), np_);
      const Vector qstar = first ? qj : Vector(0.5 * (prev_.surface_potential + qj));
      Vector rc = Mg * (pj - pprev) + sub_tau * (Kg * qstar);
      if (has_flux_multiplier(model)) rc += tau * (Tp.transpose() * x.segment(off_m_, nl_));
      r.segment(p_offset(j), np_) = rc;
      r.segment(q_offset(j), np_) = potential_terms + eps * (Tp.transpose() * lambda) - Mg * qstar;
    }
  }

  r.segment(off_l_, nl_) = Tu * u1 - Tp * x.segment(p_offset(substeps_ - 1), np_);
  if (has_flux_multiplier(model)) {
    r.segment(off_m_, nl_) = Tu * w1 - Tp * x.segment(q_offset(0), np_);
  }
  return r;
}

SparseMatrix StepSystem::jacobian(const Vector& x) const {
  if (x.size() != total_) throw InvalidArgument("StepSystem::jacobian: wrong length");
  const Model model = cfg_.model;
  const bool first = cfg_.order == SchemeOrder::First;
  const double th = theta();
  const double tau = cfg_.tau;
  const double eps = cfg_.epsilon;

  const auto& M = disc_.mass;
  const auto& K = disc_.stiffness;
  const auto& Mg = disc_.boundary_mass;
  const auto& Kg = disc_.boundary_stiffness;
  const auto& Tu = disc_.trace.bulk;
  const auto& Tp = disc_.trace.boundary;

  Triplets t;
  t.reserve(4 * (M.nonZeros() + K.nonZeros()) + substeps_ * 6 * (Mg.nonZeros() + Tp.nonZeros()) +
            4 * Tu.nonZeros());

  const auto u1 = x.segment(off_u_, nu_);
  Vector dnl(nu_);
  for (Index i = 0; i < nu_; ++i) {
    dnl[i] = first ? cfg_.bulk_potential.convex_second_derivative(u1[i])
                   : cn_slope_partials(prev_.u[i], u1[i]).second;
  }

  // bulk balance
  add_block(t, off_u_, off_u_, M, 1.0);
  add_block(t, off_u_, off_w_, K, th * tau * cfg_.sigma);
  // chemical potential
  add_block(t, off_w_, off_u_, K, th * eps);
  add_diagonal(t, off_w_, off_u_, (1.0 / eps) * disc_.lumped_mass.cwiseProduct(dnl));
  add_block(t, off_w_, off_w_, M, -th);
  if (!has_boundary(model)) {
    SparseMatrix jac(total_, total_);
    jac.setFromTriplets(t.begin(), t.end());
    return jac;
  }
  add_transposed(t, off_w_, off_l_, Tu, -eps);
  if (has_flux_multiplier(model)) add_transposed(t, off_u_, off_m_, Tu, -tau);

  const double sub_tau = tau / substeps_;
  const double dk = cfg_.delta * cfg_.kappa;
  const auto& wg = cfg_.surface_potential;
  const Vector& mg = disc_.boundary_lumped_mass;

  for (int j = 0; j < substeps_; ++j) {
    const auto pj = x.segment(p_offset(j), np_);
    const Vector pprev = j == 0 ? prev_.p : Vector(x.segment(p_offset(j - 1), np_));
    Vector d_cur(np_), d_prev(np_);
    for (Index i = 0; i < np_; ++i) {
      if (first) {
        d_cur[i] = wg.convex_second_derivative(pj[i]);
        d_prev[i] = -wg.concave_second_derivative(pprev[i]);
      } else {
        const auto [da, db] = cn_slope_partials(pprev[i], pj[i]);
        d_cur[i] = db;
        d_prev[i] = da;
      }
    }
    const Vector nl_cur = (1.0 / cfg_.delta) * mg.cwiseProduct(d_cur);
    const Vector nl_prev = (1.0 / cfg_.delta) * mg.cwiseProduct(d_prev);
    // Substep j > 0 also depends on p_{j-1} through the explicit terms.
    const bool coupled_prev = j > 0;

    // Row index for the equation carrying the potential terms.
    const Index pot_row = model == Model::AllenCahn ? p_offset(j) : q_offset(j);
    const double pot_scale = model == Model::AllenCahn ? sub_tau : 1.0;

    add_block(t, pot_row, p_offset(j), Kg, pot_scale * th * dk);
    add_diagonal(t, pot_row, p_offset(j), pot_scale * nl_cur);
    if (coupled_prev) {
      // midpoint weights only arise for ℓ = 1 in the second-order scheme
      add_diagonal(t, pot_row, p_offset(j - 1), pot_scale * nl_prev);
    }
    add_transposed(t, pot_row, off_l_, Tp, pot_scale * eps);

    add_block(t, p_offset(j), p_offset(j), Mg, 1.0);
    if (coupled_prev) add_block(t, p_offset(j), p_offset(j - 1), Mg, -1.0);

    if (model != Model::AllenCahn) {
      add_block(t, p_offset(j), q_offset(j), Kg, th * sub_tau);
      add_block(t, q_offset(j), q_offset(j), Mg, -th);
      if (has_flux_multiplier(model)) add_transposed(t, p_offset(j), off_m_, Tp, tau);
    }
  }

  add_block(t, off_l_, off_u_, Tu, 1.0);
  add_block(t, off_l_, p_offset(substeps_ - 1), Tp, -1.0);
  if (has_flux_multiplier(model)) {
    add_block(t, off_m_, off_w_, Tu, 1.0);
    add_block(t, off_m_, q_offset(0), Tp, -1.0);
  }

  SparseMatrix jac(total_, total_);
  jac.setFromTriplets(t.begin(), t.end());
  return jac;
}

Vector StepSystem::initial_guess() const {
  Vector x = Vector::Zero(total_);
  x.segment(off_u_, nu_) = prev_.u;
  if (sized(prev_.w, nu_)) x.segment(off_w_, nu_) = prev_.w;
  if (!has_boundary(cfg_.model)) return x;
  for (int j = 0; j < substeps_; ++j) {
    x.segment(p_offset(j), np_) = prev_.p;
    if (has_surface_potential(cfg_.model) && sized(prev_.surface_potential, np_)) {
      x.segment(q_offset(j), np_) = prev_.surface_potential;
    }
  }
  if (sized(prev_.lambda, nl_)) x.segment(off_l_, nl_) = prev_.lambda;
  if (has_flux_multiplier(cfg_.model) && sized(prev_.mu, nl_)) x.segment(off_m_, nl_) = prev_.mu;
  return x;
}

Vector StepSystem::pack(const SystemState& c) const {
  auto need = [](const Vector& v, Index n, const char* name) {
    if (v.size() != n) {
      throw InvalidArgument(std::string("StepSystem::pack: candidate field ") + name +
                            " has length " + std::to_string(v.size()) + ", expected " +
                            std::to_string(n));
    }
  };
  Vector x(total_);
  need(c.u, nu_, "u");
  need(c.w, nu_, "w");
  x.segment(off_u_, nu_) = c.u;
  x.segment(off_w_, nu_) = c.w;
  if (!has_boundary(cfg_.model)) return x;
  if (static_cast<int>(c.p_substeps.size()) != substeps_ - 1) {
    throw InvalidArgument("StepSystem::pack: candidate needs ell-1 boundary substates");
  }
  for (int j = 0; j < substeps_; ++j) {
    const Vector& pj = j + 1 == substeps_ ? c.p : c.p_substeps[j];
    need(pj, np_, "p");
    x.segment(p_offset(j), np_) = pj;
    if (has_surface_potential(cfg_.model)) {
      if (j + 1 < substeps_ &&
          static_cast<int>(c.surface_potential_substeps.size()) != substeps_ - 1) {
        throw InvalidArgument(
            "StepSystem::pack: candidate needs ell-1 surface potential substates");
      }
      const Vector& qj = j + 1 == substeps_ ? c.surface_potential : c.surface_potential_substeps[j];
      need(qj, np_, "surface_potential");
      x.segment(q_offset(j), np_) = qj;
    }
  }
  need(c.lambda, nl_, "lambda");
  x.segment(off_l_, nl_) = c.lambda;
  if (has_flux_multiplier(cfg_.model)) {
    need(c.mu, nl_, "mu");
    x.segment(off_m_, nl_) = c.mu;
  }
  return x;
}

SystemState StepSystem::unpack(const Vector& x) const {
  SystemState s;
  s.step = prev_.step + 1;
  s.u = x.segment(off_u_, nu_);
  s.w = x.segment(off_w_, nu_);
  if (!has_boundary(cfg_.model)) return s;
  for (int j = 0; j + 1 < substeps_; ++j) {
    s.p_substeps.emplace_back(x.segment(p_offset(j), np_));
    if (has_surface_potential(cfg_.model)) {
      s.surface_potential_substeps.emplace_back(x.segment(q_offset(j), np_));
    }
  }
  s.p = x.segment(p_offset(substeps_ - 1), np_);
  if (has_surface_potential(cfg_.model)) {
    s.surface_potential = x.segment(q_offset(substeps_ - 1), np_);
  }
  s.lambda = x.segment(off_l_, nl_);
  if (has_flux_multiplier(cfg_.model)) s.mu = x.segment(off_m_, nl_);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

SystemState solve_step(const ModelConfig& cfg, const Discretization& disc, const SystemState& state,
                       const NewtonSettings& settings, NewtonResult* info,
                       NewtonWorkspace* workspace) {
  const StepSystem sys(cfg, disc, state);
  NewtonResult res =
      newton_solve([&](const Vector& x) { return sys.residual(x); },
                   [&](const Vector& x) { return sys.jacobian(x); }, sys.initial_guess(), settings,
                   [&](Index i) { return sys.block_name(i); }, workspace);
  SystemState next = sys.unpack(res.x);
  if (info != nullptr) *info = std::move(res);
  return next;
}

}  // namespace

SystemState step_first_order(const ModelConfig& cfg, const Discretization& disc,
                             const SystemState& state, const NewtonSettings& settings,
                             NewtonResult* info, NewtonWorkspace* workspace) {
  if (cfg.order != SchemeOrder::First) {
    throw InvalidArgument("step_first_order: config requests the second-order scheme");
  }
  return solve_step(cfg, disc, state, settings, info, workspace);
}

SystemState step_first_order_substepped(const ModelConfig& cfg, const Discretization& disc,
                                        const SystemState& state, const NewtonSettings& settings,
                                        NewtonResult* info, NewtonWorkspace* workspace) {
  if (cfg.model != Model::AllenCahn && cfg.model != Model::LiuWu) {
    throw InvalidArgument("step_first_order_substepped: requires allen_cahn or liu_wu");
  }
  return step_first_order(cfg, disc, state, settings, info, workspace);
}

SystemState step_second_order(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const NewtonSettings& settings,
                              NewtonResult* info, NewtonWorkspace* workspace) {
  if (cfg.order != SchemeOrder::SecondCN) {
    throw InvalidArgument("step_second_order: config requests the first-order scheme");
  }
  return solve_step(cfg, disc, state, settings, info, workspace);
}

SystemState advance(const ModelConfig& cfg, const Discretization& disc, const SystemState& state,
                    const NewtonSettings& settings, NewtonResult* info,
                    NewtonWorkspace* workspace) {
  if (cfg.order == SchemeOrder::SecondCN)
    return step_second_order(cfg, disc, state, settings, info, workspace);
  if (cfg.ell > 1) return step_first_order_substepped(cfg, disc, state, settings, info, workspace);
  return step_first_order(cfg, disc, state, settings, info, workspace);
}

InitialPotentials initial_chemical_potentials(const ModelConfig& cfg, const Discretization& disc,
                                              const Vector& u0, const Vector& p0) {
  cfg.validate();
  const Model model = cfg.model;
  const Index nu = disc.num_bulk();
  const Index np = has_boundary(model) ? disc.num_boundary() : 0;
  const Index nl = has_boundary(model) ? disc.num_multiplier() : 0;
  if (u0.size() != nu) throw InvalidArgument("initial_chemical_potentials: u0 has wrong length");
  if (has_boundary(model)) {
    if (p0.size() != np) throw InvalidArgument("initial_chemical_potentials: p0 has wrong length");
    SystemState probe;
    probe.u = u0;
    probe.p = p0;
    if (constraint_violation(probe, disc) > kConsistencyTol) {
      throw InvalidState("initial_chemical_potentials: p0 is not the trace of u0");
    }
  }

  // Unknowns: [u̇ | w | ṗ | q | λ | μ]
  const Index off_du = 0, off_w = nu, off_dp = 2 * nu;
  const Index off_q = off_dp + np;
  const Index off_l = off_q + (has_surface_potential(model) ? np : 0);
  const Index off_m = off_l + nl;
  const Index total = off_m + (has_flux_multiplier(model) ? nl : 0);

  const double eps = cfg.epsilon;
  const auto& Tu = disc.trace.bulk;
  const auto& Tp = disc.trace.boundary;
  Triplets t;
  Vector rhs = Vector::Zero(total);

  add_block(t, off_du, off_du, disc.mass, 1.0);
  add_block(t, off_du, off_w, disc.stiffness, cfg.sigma);
  add_block(t, off_w, off_w, disc.mass, 1.0);
  rhs.segment(off_w, nu) =
      eps * (disc.stiffness * u0) +
      (1.0 / eps) * disc.lumped_mass.cwiseProduct(apply(cfg.bulk_potential.derivative, u0));

  if (has_boundary(model)) {
    add_transposed(t, off_w, off_l, Tu, eps);
    const Vector surface_force = cfg.delta * cfg.kappa * (disc.boundary_stiffness * p0) +
                                 (1.0 / cfg.delta) * disc.boundary_lumped_mass.cwiseProduct(apply(
                                                         cfg.surface_potential.derivative, p0));
    add_block(t, off_dp, off_dp, disc.boundary_mass, 1.0);
    if (model == Model::AllenCahn) {
      add_transposed(t, off_dp, off_l, Tp, eps);
      rhs.segment(off_dp, np) = -surface_force;
    } else {
      add_block(t, off_dp, off_q, disc.boundary_stiffness, 1.0);
      add_block(t, off_q, off_q, disc.boundary_mass, 1.0);
      add_transposed(t, off_q, off_l, Tp, -eps);
      rhs.segment(off_q, np) = surface_force;
    }
    // hidden constraint: the time derivative of the trace constraint
    add_block(t, off_l, off_du, Tu, 1.0);
    add_block(t, off_l, off_dp, Tp, -1.0);
    if (has_flux_multiplier(model)) {
      add_transposed(t, off_du, off_m, Tu, -1.0);
      add_transposed(t, off_dp, off_m, Tp, 1.0);
      add_block(t, off_m, off_w, Tu, 1.0);
      add_block(t, off_m, off_q, Tp, -1.0);
    }
  }

  SparseMatrix a(total, total);
  a.setFromTriplets(t.begin(), t.end());
  Vector x;
  try {
    x = sparse_linear_solve(a, rhs, [&](Index i) -> std::string {
      if (i < off_w) return "du/dt";
      if (i < off_dp) return "w";
      if (i < off_q) return "dp/dt";
      if (i < off_l) return "q";
      if (i < off_m) return "lambda";
      return "mu";
    });
  } catch (const SolverError& e) {
    throw InvalidState(std::string("initial_chemical_potentials: singular algebraic block: ") +
                       e.what());
  }

  InitialPotentials out;
  out.w = x.segment(off_w, nu);
  if (has_surface_potential(model)) out.surface_potential = x.segment(off_q, np);
  if (has_boundary(model)) out.lambda = x.segment(off_l, nl);
  if (has_flux_multiplier(model)) out.mu = x.segment(off_m, nl);
  return out;
}

Vector consistent_boundary_samples(const Discretization& disc, const Vector& u,
                                   const std::function<double(Point)>& u0) {
  const Index np = disc.num_boundary();
  const Index nl = disc.num_multiplier();
  Vector g(np);
  for (Index k = 0; k < np; ++k) g[k] = u0(disc.boundary.position(static_cast<int>(k)));
  const Vector mismatch = disc.trace.bulk * u - disc.trace.boundary * g;
  if (mismatch.lpNorm<Eigen::Infinity>() <= 1e-14) return g;

  // smallest H¹(Γ) correction c with T_p (g + c) = T_u u; the H¹ weight keeps
  // c smooth between the coarse nodes
  Triplets t;
  add_block(t, 0, 0, disc.boundary_mass, 1.0);
  add_block(t, 0, 0, disc.boundary_stiffness, 1.0);
  add_transposed(t, 0, np, disc.trace.boundary, 1.0);
  add_block(t, np, 0, disc.trace.boundary, 1.0);
  SparseMatrix a(np + nl, np + nl);
  a.setFromTriplets(t.begin(), t.end());
  Vector rhs = Vector::Zero(np + nl);
  rhs.tail(nl) = mismatch;
  return g + sparse_linear_solve(a, rhs).head(np);
}

SystemState consistent_initial_state(const ModelConfig& cfg, const Discretization& disc,
                                     const std::function<double(Point)>& u0) {
  SystemState s;
  s.u.resize(disc.num_bulk());
  for (Index i = 0; i < s.u.size(); ++i) s.u[i] = u0(disc.bulk.vertices[i]);
  if (has_boundary(cfg.model)) s.p = consistent_boundary_samples(disc, s.u, u0);
  if (cfg.order == SchemeOrder::SecondCN) {
    InitialPotentials ip = initial_chemical_potentials(cfg, disc, s.u, s.p);
    s.w = std::move(ip.w);
    s.surface_potential = std::move(ip.surface_potential);
    s.lambda = std::move(ip.lambda);
    s.mu = std::move(ip.mu);
  }
  return s;
}

Vector assemble_step_residual(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const SystemState& candidate) {
  const StepSystem sys(cfg, disc, state);
  return sys.residual(sys.pack(candidate));
}

SparseMatrix assemble_step_jacobian(const ModelConfig& cfg, const Discretization& disc,
                                    const SystemState& state, const SystemState& candidate) {
  const StepSystem sys(cfg, disc, state);
  return sys.jacobian(sys.pack(candidate));
}

SystemState dense_oracle_step(const ModelConfig& cfg, const Discretization& disc,
                              const SystemState& state, const NewtonSettings& settings) {
  const StepSystem sys(cfg, disc, state);
  if (sys.size() > 200) {
    throw InvalidArgument("dense_oracle_step: " + std::to_string(sys.size()) +
                          " unknowns exceed the limit of 200");
  }
  NewtonResult res = dense_newton_solve([&](const Vector& x) { return sys.residual(x); },
                                        sys.initial_guess(), settings);
  return sys.unpack(res.x);
}

}  // namespace chdyn
