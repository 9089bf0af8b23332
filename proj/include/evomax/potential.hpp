#pragma once
// Potential reconstruction for Maxwell fields via the extended system with the
// REVERSED sign, (d0 - A) alpha = (0, E, H, 0) + delta (x) (0, alpha10, 0, 0),
// plus the gauge transformation bookkeeping and the charge compatibility
// right-hand side.  The scalar slots alpha2, alpha3 of an admissible
// reconstruction stay at the solver floor; the verification clauses are
//   (a) max_t ||alpha2||, ||alpha3|| <= tol
//   (b) ||E - d0(alpha1 - step (x) alpha10) + grad_i alpha0|| <= tol
//   (c) ||H + curl_i alpha1|| <= tol
// with tol = 1e-8 budgeted for the two chained solves.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "linalg.hpp"
#include "material.hpp"
#include "solver.hpp"

namespace evomax {

struct PotentialState {
  Trajectory traj;  // extended layout: (alpha0, alpha1, alpha2, alpha3)
  Vec alpha10;      // initial datum carried by the impulse
  double hypothesis_residual = 0.0;  // ||H_0 + curl_i alpha10|| (h^3 norm)
  std::vector<std::string> warnings;
};

struct PotentialReport {
  bool ok = true;
  double tol = 1e-8;
  double max_alpha2 = 0.0, max_alpha3 = 0.0;  // clause (a)
  double max_clause_b = 0.0;
  double max_clause_c = 0.0;
  std::string failed;  // empty or a comma-separated subset of "a", "b", "c"
};

// Least-squares distance of H0 from the range of the interior curl, relative
// to ||H0||: the discrete form of the range hypothesis on the magnetic datum.
inline double curl_range_residual(const VectorCalculus& vc, const Vec& H0) {
  if (H0.size() != vc.v2.dim)
    throw DimError("curl_range_residual: H0 must live on " + describe(vc.v2));
  const double scale = grid_norm(vc.grid, H0);
  if (scale == 0.0) return 0.0;
  const Eigen::MatrixXd C = to_eigen_dense(vc.curl_i);
  Eigen::VectorXd b(long(H0.size()));
  for (std::size_t i = 0; i < H0.size(); ++i) b[long(i)] = H0[i];
  const Eigen::VectorXd x = C.completeOrthogonalDecomposition().solve(b);
  Vec r(H0.size());
  const Eigen::VectorXd rr = b - C * x;
  for (std::size_t i = 0; i < H0.size(); ++i) r[i] = rr[long(i)];
  return grid_norm(vc.grid, r) / scale;
}

// Causal solve of (d0 - A) alpha = (0, E, H, 0) + delta (x) (0, alpha10, 0, 0).
// The theorem hypothesis H_0 = -curl_i alpha10 refers to the pre-impulse
// magnetic datum; when `H0` is not supplied it is reconstructed from the first
// trajectory sample under the vacuum stepping it was produced by
// (H_0 = H^0 + tau curl_i E^0), which is exact for an implicit Euler Maxwell
// solve with identity mass and no magnetic current.
inline PotentialState solve_potential(const Trajectory& EH, const Vec& alpha10,
                                      const GridSpec& grid, const TimeGrid& tg,
                                      const std::optional<Vec>& H0 = std::nullopt) {
  const VectorCalculus vc = vector_calculus(grid);
  const Layout pair = maxwell_layout(vc);
  const Layout ext = extended_layout(vc);
  require_same_layout(EH.lay, pair, "solve_potential");
  if (alpha10.size() != vc.v1.dim)
    throw DimError("solve_potential: alpha10 must live on " + describe(vc.v1));
  if (int(EH.samples.size()) != tg.steps)
    throw DimError("solve_potential: trajectory has " + std::to_string(EH.samples.size()) +
                   " samples for " + std::to_string(tg.steps) + " steps");

  BlockOp negA = assemble_block(Tag::Extended, vc);
  negA.flat = negA.flat.scaled(-1.0);

  SourceTerm f = SourceTerm::zero(ext.dim());
  f.regular.resize(std::size_t(tg.steps));
  for (int n = 0; n < tg.steps; ++n) {
    Vec v(ext.dim(), 0.0);
    ext.put(v, 1, EH.lay.take(EH.samples[std::size_t(n)], 0));
    ext.put(v, 2, EH.lay.take(EH.samples[std::size_t(n)], 1));
    f.regular[std::size_t(n)] = std::move(v);
  }
  if (max_abs(alpha10) != 0.0) f.impulses.push_back({0, ext.embed(1, alpha10)});

  PotentialState st{solve_implicit_euler(identity_law(grid, ext), negA, f, tg),
                    alpha10, 0.0, {}};

  Vec h0;
  if (H0) {
    h0 = *H0;
    if (h0.size() != vc.v2.dim)
      throw DimError("solve_potential: H0 must live on " + describe(vc.v2));
  } else {
    const Vec E0 = EH.lay.take(EH.samples[0], 0);
    const Vec Hfirst = EH.lay.take(EH.samples[0], 1);
    h0 = Hfirst + scaled(vc.curl_i.apply(E0), tg.tau);
  }
  st.hypothesis_residual = grid_norm(grid, h0 + vc.curl_i.apply(alpha10));
  if (st.hypothesis_residual > 1e-10)
    st.warnings.push_back("solve_potential: H0 + curl_i alpha10 has norm " +
                          std::to_string(st.hypothesis_residual) +
                          " (reconstruction hypothesis violated)");
  return st;
}

// Clauses (a), (b), (c) against the Maxwell trajectory that fed the solve.
inline PotentialReport verify_potential(const PotentialState& st, const Trajectory& EH,
                                        const TimeGrid& tg, double tol = 1e-8) {
  const VectorCalculus vc = vector_calculus(st.traj.grid);
  const Layout ext = extended_layout(vc);
  const Layout pair = maxwell_layout(vc);
  require_same_layout(st.traj.lay, ext, "verify_potential(alpha)");
  require_same_layout(EH.lay, pair, "verify_potential(EH)");
  if (EH.samples.size() != st.traj.samples.size())
    throw DimError("verify_potential: trajectory lengths differ");

  PotentialReport rep;
  rep.tol = tol;
  const std::size_t steps = st.traj.samples.size();

  std::vector<Vec> shifted(steps);
  for (std::size_t n = 0; n < steps; ++n)
    shifted[n] = ext.take(st.traj.samples[n], 1) - st.alpha10;
  const std::vector<Vec> dshift = d0_apply(tg, shifted);

  for (std::size_t n = 0; n < steps; ++n) {
    const Vec& u = st.traj.samples[n];
    rep.max_alpha2 = std::max(rep.max_alpha2, grid_norm(st.traj.grid, ext.take(u, 2)));
    rep.max_alpha3 = std::max(rep.max_alpha3, grid_norm(st.traj.grid, ext.take(u, 3)));

    const Vec E = pair.take(EH.samples[n], 0);
    const Vec H = pair.take(EH.samples[n], 1);
    const Vec b = E - dshift[n] + vc.grad_i.apply(ext.take(u, 0));
    const Vec c = H + vc.curl_i.apply(ext.take(u, 1));
    rep.max_clause_b = std::max(rep.max_clause_b, grid_norm(st.traj.grid, b));
    rep.max_clause_c = std::max(rep.max_clause_c, grid_norm(st.traj.grid, c));
  }

  auto flag = [&rep](bool bad, const char* name) {
    if (!bad) return;
    rep.ok = false;
    if (!rep.failed.empty()) rep.failed += ",";
    rep.failed += name;
  };
  flag(rep.max_alpha2 > tol || rep.max_alpha3 > tol, "a");
  flag(rep.max_clause_b > tol, "b");
  flag(rep.max_clause_c > tol, "c");
  return rep;
}

// alpha' = (alpha0 + d0 phi, alpha1 + grad_i phi, alpha2, alpha3), with
// rhs_shift = ((d0^2 - div grad_i) phi, 0, 0, 0); the discrete identity
// (d0 - A) alpha' - (d0 - A) alpha = rhs_shift is asserted to 1e-10.
inline std::pair<PotentialState, std::vector<Vec>> gauge_transform(
    const PotentialState& st, const std::vector<Vec>& phi, const TimeGrid& tg) {
  const VectorCalculus vc = vector_calculus(st.traj.grid);
  const Layout ext = extended_layout(vc);
  require_same_layout(st.traj.lay, ext, "gauge_transform");
  if (int(phi.size()) != tg.steps)
    throw DimError("gauge_transform: phi needs one sample per step");
  for (const Vec& p : phi)
    if (p.size() != vc.s0.dim)
      throw DimError("gauge_transform: phi must live on " + describe(vc.s0));

  const std::vector<Vec> dphi = d0_apply(tg, phi);
  const std::vector<Vec> d2phi = d0_apply(tg, dphi);

  PotentialState out = st;
  std::vector<Vec> shift(phi.size());
  for (std::size_t n = 0; n < phi.size(); ++n) {
    Vec& u = out.traj.samples[n];
    Vec a0 = ext.take(u, 0) + dphi[n];
    Vec a1 = ext.take(u, 1) + vc.grad_i.apply(phi[n]);
    ext.put(u, 0, a0);
    ext.put(u, 1, a1);
    shift[n] = ext.embed(0, d2phi[n] - vc.div.apply(vc.grad_i.apply(phi[n])));
  }

  // Residual of the asserted identity, relative to the shift scale.
  BlockOp negA = assemble_block(Tag::Extended, vc);
  negA.flat = negA.flat.scaled(-1.0);
  std::vector<Vec> delta(phi.size());
  for (std::size_t n = 0; n < phi.size(); ++n)
    delta[n] = out.traj.samples[n] - st.traj.samples[n];
  const std::vector<Vec> ddelta = d0_apply(tg, delta);
  double worst = 0.0, scale = 1.0;
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const Vec r = ddelta[n] + negA.flat.apply(delta[n]) - shift[n];
    worst = std::max(worst, grid_norm(st.traj.grid, r));
    scale = std::max(scale, grid_norm(st.traj.grid, shift[n]));
  }
  if (worst / scale > 1e-10)
    throw std::runtime_error("gauge_transform: shift identity violated, residual " +
                             std::to_string(worst / scale));
  return {std::move(out), std::move(shift)};
}

// rho^n = -div (d0^{-1} J)^n + div E0 (the charge compatibility condition).
inline std::vector<Vec> compatibility_rhs(const std::vector<Vec>& J, const Vec& E0,
                                          const GridSpec& grid, const TimeGrid& tg) {
  const VectorCalculus vc = vector_calculus(grid);
  if (E0.size() != vc.v1.dim)
    throw DimError("compatibility_rhs: E0 must live on " + describe(vc.v1));
  for (const Vec& j : J)
    if (j.size() != vc.v1.dim)
      throw DimError("compatibility_rhs: J samples must live on " + describe(vc.v1));
  const Vec divE0 = vc.div.apply(E0);
  const std::vector<Vec> intJ = d0_inverse_apply(tg, J);
  std::vector<Vec> rho(J.size());
  for (std::size_t n = 0; n < J.size(); ++n)
    rho[n] = divE0 - vc.div.apply(intJ[n]);
  return rho;
}

}  // namespace evomax
