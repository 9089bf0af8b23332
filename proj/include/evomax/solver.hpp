#pragma once
// Causal time integrators for (d0 M0 + M1 + A) U = F:
//   implicit Euler   — canonical causal scheme, exact discrete resolvent
//   Crank–Nicolson   — M0-energy-conserving for skew A, M1 = 0, F = 0
//   exponential      — dense propagator (M0 = 1), desk-scale cross-check
// plus the weighted a-priori bound ||U||_nu <= (1 + kappa*tau) ||F||_nu / c0.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "block.hpp"
#include "linalg.hpp"
#include "material.hpp"
#include "timegrid.hpp"

namespace evomax {

namespace detail {

inline void add_impulses(Vec& rhs, const SourceTerm& f, int n, double weight) {
  for (const auto& [k, v] : f.impulses)
    if (k == n) axpy(rhs, weight, v);
}

inline Trajectory make_traj(const GridSpec& g, const Layout& lay, const TimeGrid& tg,
                            std::string solver) {
  Trajectory t;
  t.grid = g;
  t.lay = lay;
  t.tg = tg;
  t.solver = std::move(solver);
  t.samples.reserve(std::size_t(tg.steps));
  return t;
}

}  // namespace detail

// (M0/tau + M1 + A) U^n = F^n + (M0/tau) U^{n-1} + impulse_n / tau,  U^{-1} = 0.
inline Trajectory solve_implicit_euler(const MaterialLaw& law, const BlockOp& A,
                                       const SourceTerm& f, const TimeGrid& tg) {
  tg.validate();
  f.validate(tg);
  require_same_layout(law.lay, A.rows, "solve_implicit_euler");
  if (f.dim != A.rows.dim()) throw DimError("solve_implicit_euler: source dim mismatch");

  const SparseOp M0_over_tau = law.M0.scaled(1.0 / tg.tau);
  const SparseOp T = M0_over_tau + law.M1 + A.flat;
  LuSolver lu(T, "implicit_euler step matrix");

  Trajectory traj = detail::make_traj(A.grid, A.rows, tg, "implicit_euler");
  Vec prev(A.rows.dim(), 0.0);
  for (int n = 0; n < tg.steps; ++n) {
    Vec rhs = f.at(n);
    axpy(rhs, 1.0, M0_over_tau.apply(prev));
    detail::add_impulses(rhs, f, n, 1.0 / tg.tau);
    Vec u = lu.solve(rhs);
    const Vec res = T.apply(u) - rhs;
    traj.max_step_residual = std::max(
        traj.max_step_residual, norm2(res) / std::max(1.0, norm2(rhs)));
    traj.samples.push_back(u);
    prev = std::move(u);
  }
  return traj;
}

// (M0/tau + (M1+A)/2) U^n = (M0/tau - (M1+A)/2) U^{n-1} + (F^n + F^{n-1})/2
//                           + impulse_n / tau,  with F^{-1} = 0.
inline Trajectory solve_crank_nicolson(const MaterialLaw& law, const BlockOp& A,
                                       const SourceTerm& f, const TimeGrid& tg) {
  tg.validate();
  f.validate(tg);
  require_same_layout(law.lay, A.rows, "solve_crank_nicolson");
  if (f.dim != A.rows.dim()) throw DimError("solve_crank_nicolson: source dim mismatch");

  const SparseOp M0_over_tau = law.M0.scaled(1.0 / tg.tau);
  const SparseOp half = (law.M1 + A.flat).scaled(0.5);
  const SparseOp L = M0_over_tau + half;
  const SparseOp R = M0_over_tau - half;
  LuSolver lu(L, "crank_nicolson step matrix");

  Trajectory traj = detail::make_traj(A.grid, A.rows, tg, "crank_nicolson");
  Vec prev(A.rows.dim(), 0.0);
  for (int n = 0; n < tg.steps; ++n) {
    Vec rhs = R.apply(prev);
    axpy(rhs, 0.5, f.at(n));
    if (n > 0) axpy(rhs, 0.5, f.at(n - 1));
    detail::add_impulses(rhs, f, n, 1.0 / tg.tau);
    Vec u = lu.solve(rhs);
    const Vec res = L.apply(u) - rhs;
    traj.max_step_residual = std::max(
        traj.max_step_residual, norm2(res) / std::max(1.0, norm2(rhs)));
    traj.samples.push_back(u);
    prev = std::move(u);
  }
  return traj;
}

// Dense propagator for (d0 + Aw) U = F (unit mass):
//   U^n = exp(-tau*Aw) (U^{n-1} + (tau/2) F^{n-1}) + (tau/2) F^n + impulse_n,
// the trapezoidal quadrature of the causal convolution with exact impulse
// injection at the impulse step.
inline Trajectory solve_exponential(const BlockOp& Aw, const SourceTerm& f,
                                    const TimeGrid& tg) {
  tg.validate();
  f.validate(tg);
  if (f.dim != Aw.rows.dim()) throw DimError("solve_exponential: source dim mismatch");
  const std::size_t n = Aw.rows.dim();
  if (n > 4096)
    throw std::runtime_error("solve_exponential: dense dimension " + std::to_string(n) +
                             " exceeds 4096");
  Trajectory traj = detail::make_traj(Aw.grid, Aw.rows, tg, "exponential");
  const double skew = (Aw.flat + Aw.flat.transpose()).max_abs();
  if (skew > 1e-12)
    traj.warnings.push_back("solve_exponential: Aw not skew (|Aw+Aw^T|_max = " +
                            std::to_string(skew) + "); conservation checks disabled");

  const Eigen::MatrixXd E = expm(Eigen::MatrixXd(-tg.tau * to_eigen_dense(Aw.flat)));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(long(n));
  Eigen::VectorXd fprev = Eigen::VectorXd::Zero(long(n));
  for (int step = 0; step < tg.steps; ++step) {
    const Eigen::VectorXd fn = to_eigen(f.at(step));
    u = E * (u + (tg.tau / 2.0) * fprev) + (tg.tau / 2.0) * fn;
    for (const auto& [k, v] : f.impulses)
      if (k == step) u += to_eigen(v);
    traj.samples.push_back(from_eigen(u));
    fprev = fn;
  }
  return traj;
}

// --- weighted a-priori bound ------------------------------------------------

struct BoundCheck {
  double lhs = 0.0;       // ||U||_nu
  double rhs = 0.0;       // (1 + kappa*tau) ||F||_nu / c0
  double kappa = 0.0;     // documented tau-dependent slack
  double c_eff = 0.0;     // c0 - (nu - beta) lambda_max(M0)
  bool ok = false;
};

inline double m0_lambda_max(const MaterialLaw& law) {
  if (law.kind == MaterialLaw::Kind::diagonal) {
    double m = 0.0;
    for (double v : law.m0_diag) {
      if (v < 0.0) throw std::runtime_error("m0_lambda_max: M0 not positive semidefinite");
      m = std::max(m, v);
    }
    return m;
  }
  double m = 0.0;
  for (const auto& b : law.m0_blocks) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b + b.transpose()));
    if (es.eigenvalues().minCoeff() < 0.0)
      throw std::runtime_error("m0_lambda_max: M0 not positive semidefinite");
    m = std::max(m, es.eigenvalues().maxCoeff());
  }
  return m;
}

// Discrete form of the (H2) coercivity bound for the implicit Euler scheme
// (impulse-free sources, M0 >= 0, A skew):
//   beta  = (1 - exp(-2 nu tau)) / (2 tau)   (so the weight telescopes)
//   c_eff = c0 - (nu - beta) lambda_max(M0)  (weighted-sum coercivity loss)
//   kappa = (c0/c_eff - 1)/tau               =>  (1+kappa*tau)/c0 = 1/c_eff
inline BoundCheck solution_bound_check(const Trajectory& traj, const SourceTerm& f,
                                       const MaterialLaw& law,
                                       const PositivityReport& rep) {
  if (f.has_impulses())
    throw std::runtime_error("solution_bound_check: impulse-free sources only");
  const TimeGrid& tg = traj.tg;
  if (!(tg.nu > 0.0) || rep.nu != tg.nu)
    throw std::runtime_error("solution_bound_check: report must certify nu of the run");
  const double lmax = m0_lambda_max(law);
  const double beta = (1.0 - std::exp(-2.0 * tg.nu * tg.tau)) / (2.0 * tg.tau);
  BoundCheck bc;
  bc.c_eff = rep.c0 - (tg.nu - beta) * lmax;
  if (!(bc.c_eff > 0.0))
    throw std::runtime_error("solution_bound_check: effective coercivity nonpositive "
                             "(tau too large for this nu)");
  bc.kappa = (rep.c0 / bc.c_eff - 1.0) / tg.tau;
  bc.lhs = weighted_norm(traj);
  bc.rhs = (1.0 + bc.kappa * tg.tau) *
           weighted_norm_samples(traj.grid, tg, f.regular) / rep.c0;
  bc.ok = bc.lhs <= bc.rhs * (1.0 + 1e-9);
  return bc;
}

}  // namespace evomax
