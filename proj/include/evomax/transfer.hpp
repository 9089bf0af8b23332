#pragma once
// Concrete systems — Maxwell (E,H), extended Maxwell (8 components), GEM
// (7 components) — and the solution-transfer maps connecting them, realized
// as discrete causal-resolvent identities:
//
//   F      = d0 (d0 + B)^{-1} Ftilde      (factor off the annihilating part)
//   Ftilde = (1 + d0^{-1} B) F            (converse direction)
//
// with B the weighted annihilating block (A_ac for Maxwell <-> extended,
// A_Nac for GEM <-> extended).  The identities hold discretely because the
// backward difference d0 commutes with constant-in-time spatial operators and
// the discrete annihilation relations hold exactly; the only slack is the
// linear-solver residual, so tolerances are 1e-10/1e-11/1e-12.

#include <optional>
#include <string>
#include <vector>

#include "material.hpp"
#include "solver.hpp"
#include "weights.hpp"

namespace evomax {

enum class Integrator { implicit_euler, crank_nicolson, exponential };

inline std::string to_string(Integrator it) {
  switch (it) {
    case Integrator::implicit_euler: return "implicit_euler";
    case Integrator::crank_nicolson: return "crank_nicolson";
    case Integrator::exponential: return "exponential";
  }
  return "?";
}

inline Trajectory solve_system(const MaterialLaw& law, const BlockOp& A,
                               const SourceTerm& f, const TimeGrid& tg, Integrator it) {
  switch (it) {
    case Integrator::implicit_euler:
      return solve_implicit_euler(law, A, f, tg);
    case Integrator::crank_nicolson:
      return solve_crank_nicolson(law, A, f, tg);
    case Integrator::exponential: {
      if ((law.M0 - SparseOp::identity(law.lay.flat)).max_abs() != 0.0 ||
          law.M1.nnz() != 0)
        throw std::runtime_error(
            "solve_system: the exponential integrator requires M0 = 1, M1 = 0 "
            "(fold the weight into the spatial operator instead)");
      return solve_exponential(A, f, tg);
    }
  }
  throw std::logic_error("solve_system: unknown integrator");
}

// --- the three systems --------------------------------------------------------

// Spatial operator of the physical Maxwell system on (E, H):
// [[0, -curl],[curl_i, 0]] (the interior curl carries the electric boundary
// condition n x E = 0 on the bounded backend).
inline BlockOp assemble_maxwell_op(const VectorCalculus& vc) {
  const Layout lay = maxwell_layout(vc);
  BlockBuilder b(lay, lay);
  b.set(0, 1, vc.curl.scaled(-1.0)).set(1, 0, vc.curl_i);
  return b.assemble_tagged(Tag::AMax, vc.grid, /*check_skew=*/true);
}

// (d0 M0 + M1 + A_maxwell)(E,H) = F with F = (-J, K).
inline Trajectory solve_maxwell(const MaterialLaw& law, const GridSpec& grid,
                                const SourceTerm& F, const TimeGrid& tg,
                                Integrator it = Integrator::implicit_euler) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(law.lay, maxwell_layout(vc), "solve_maxwell");
  return solve_system(law, assemble_maxwell_op(vc), F, tg, it);
}

// sqrt(E)^{-1} A_Max sqrt(E)^{-1} + sqrt(E) A_ac sqrt(E) on the 8 components.
inline BlockOp extended_weighted_op(const PointwiseWeight& e, const VectorCalculus& vc) {
  const BlockOp amax = assemble_block(Tag::AMax, vc);
  const BlockOp aac = assemble_block(Tag::Aac, vc);
  return conjugate_weighted({{&amax, Side::inverse}, {&aac, Side::direct}}, e);
}

// The weighted operator with A_ac replaced by A_Dac only (the GEM embedding's
// 8-component form; A_Nac is the factored-off part).
inline BlockOp gem_null_weighted_op(const PointwiseWeight& e, const VectorCalculus& vc) {
  const BlockOp amax = assemble_block(Tag::AMax, vc);
  const BlockOp adac = assemble_block(Tag::ADac, vc);
  return conjugate_weighted({{&amax, Side::inverse}, {&adac, Side::direct}}, e);
}

// (d0 + sqrt(E)^{-1}A_Max sqrt(E)^{-1} + sqrt(E)A_ac sqrt(E)) V = Ftilde.
inline Trajectory solve_extended(const PointwiseWeight& e, const GridSpec& grid,
                                 const SourceTerm& Ft, const TimeGrid& tg,
                                 Integrator it = Integrator::implicit_euler) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(e.lay, extended_layout(vc), "solve_extended");
  return solve_system(identity_law(grid, e.lay), extended_weighted_op(e, vc), Ft, tg, it);
}

// 7-component GEM: (d0 + sqrt(C)^{-1} gemAMax sqrt(C)^{-1}
//                      + sqrt(C) gemADac sqrt(C)) (C,E,H) = F.
inline BlockOp gem_weighted_op(const PointwiseWeight& c, const VectorCalculus& vc) {
  const BlockOp amax = assemble_gem_amax(vc);
  const BlockOp adac = assemble_gem_adac(vc);
  return conjugate_weighted({{&amax, Side::inverse}, {&adac, Side::direct}}, c);
}

inline Trajectory solve_gem(const PointwiseWeight& c, const GridSpec& grid,
                            const SourceTerm& F, const TimeGrid& tg,
                            Integrator it = Integrator::implicit_euler) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(c.lay, gem_layout(vc), "solve_gem");
  return solve_system(identity_law(grid, c.lay), gem_weighted_op(c, vc), F, tg, it);
}

// --- transfer maps --------------------------------------------------------------

namespace detail {

inline void require_impulse_free(const SourceTerm& f, const char* what) {
  if (f.has_impulses())
    throw std::runtime_error(std::string(what) +
                             ": impulse-bearing sources are outside the scope of the "
                             "transfer identities (restriction documented)");
}

// F = d0 (d0 + B)^{-1} Ftilde, both factors realized causally.
inline SourceTerm factor_off(const SourceTerm& Ft, const MaterialLaw& unit,
                             const BlockOp& B, const TimeGrid& tg) {
  const Trajectory resolved = solve_implicit_euler(unit, B, Ft, tg);
  SourceTerm out = SourceTerm::zero(Ft.dim);
  out.regular = d0_apply(tg, resolved.samples);
  return out;
}

// Ftilde = F + d0^{-1} (B F).
inline SourceTerm reattach(const SourceTerm& F, const BlockOp& B, const TimeGrid& tg) {
  std::vector<Vec> bf(std::size_t(tg.steps));
  for (int n = 0; n < tg.steps; ++n) bf[std::size_t(n)] = B.flat.apply(F.at(n));
  const std::vector<Vec> integral = d0_inverse_apply(tg, bf);
  SourceTerm out = SourceTerm::zero(F.dim);
  out.regular.resize(std::size_t(tg.steps));
  for (int n = 0; n < tg.steps; ++n)
    out.regular[std::size_t(n)] = F.at(n) + integral[std::size_t(n)];
  return out;
}

}  // namespace detail

// F := d0 (d0 + sqrt(E) A_ac sqrt(E))^{-1} Ftilde.  The solve_extended
// trajectory for Ftilde then satisfies (d0 + sqrt(E)^{-1}A_Max sqrt(E)^{-1})V = F.
inline SourceTerm extended_to_maxwell_rhs(const SourceTerm& Ft, const PointwiseWeight& e,
                                          const TimeGrid& tg) {
  detail::require_impulse_free(Ft, "extended_to_maxwell_rhs");
  const VectorCalculus vc = vector_calculus(e.grid);
  const BlockOp aac = assemble_block(Tag::Aac, vc);
  const BlockOp B = conjugate_weighted({{&aac, Side::direct}}, e);
  return detail::factor_off(Ft, identity_law(e.grid, e.lay), B, tg);
}

// Ftilde := (1 + d0^{-1} sqrt(E) A_ac sqrt(E)) F.
inline SourceTerm maxwell_to_extended_rhs(const SourceTerm& F, const PointwiseWeight& e,
                                          const TimeGrid& tg) {
  detail::require_impulse_free(F, "maxwell_to_extended_rhs");
  const VectorCalculus vc = vector_calculus(e.grid);
  const BlockOp aac = assemble_block(Tag::Aac, vc);
  const BlockOp B = conjugate_weighted({{&aac, Side::direct}}, e);
  return detail::reattach(F, B, tg);
}

// Maximum over steps of the h^3-norm of (d0 U + B U - F)^n, relative to the
// largest source sample (impulse-free trajectories).
inline double discrete_residual(const Trajectory& traj, const BlockOp& B,
                                const SourceTerm& f) {
  detail::require_impulse_free(f, "discrete_residual");
  const auto du = d0_apply(traj.tg, traj.samples);
  double worst = 0.0, fscale = 1.0;
  for (int n = 0; n < traj.tg.steps; ++n) {
    const Vec r = du[std::size_t(n)] + B.flat.apply(traj.samples[std::size_t(n)]) - f.at(n);
    worst = std::max(worst, grid_norm(traj.grid, r));
    fscale = std::max(fscale, grid_norm(traj.grid, f.at(n)));
  }
  return worst / fscale;
}

// --- block reduction -------------------------------------------------------------

struct BlockReductionReport {
  bool ok = true;
  double max_scalar_norm = 0.0;  // max over steps of ||V0||, ||V3|| (h^3 norm)
  double max_pair_dev = 0.0;     // (V1,V2) vs the two-component weighted solve
  std::string failed;            // empty, "scalar slots" or "pair match"
};

namespace detail {

// E must not couple the scalar slots (components 0 and 7) to anything.
inline void require_reduction_form(const PointwiseWeight& e) {
  if (e.kind != PointwiseWeight::Kind::per_point_dense) return;  // diagonal conforms
  for (std::size_t pt = 0; pt < e.blocks.size(); ++pt)
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const bool rs = (r == 0 || r == 7), cs = (c == 0 || c == 7);
        if (rs != cs && e.blocks[pt](r, c) != 0.0)
          throw WeightError(
              "block_reduction_check: weight couples a scalar slot to the vector "
              "block at point " + std::to_string(pt));
        if (rs && cs && r != c && e.blocks[pt](r, c) != 0.0)
          throw WeightError(
              "block_reduction_check: weight couples the two scalar slots at point " +
              std::to_string(pt));
      }
}

// The middle 6x6 block of E as a weight on the (E, H) layout.
inline PointwiseWeight middle_weight(const PointwiseWeight& e, const VectorCalculus& vc) {
  const Layout pair = maxwell_layout(vc);
  switch (e.kind) {
    case PointwiseWeight::Kind::identity:
      return identity_weight(e.grid, pair);
    case PointwiseWeight::Kind::per_component_diagonal: {
      Vec d(pair.dim());
      const std::size_t v1 = vc.v1.dim, s0 = vc.s0.dim;
      for (std::size_t i = 0; i < v1; ++i) d[i] = e.diag[s0 + i];
      for (std::size_t i = 0; i < vc.v2.dim; ++i) d[v1 + i] = e.diag[s0 + v1 + i];
      return diag_weight(e.grid, pair, std::move(d));
    }
    case PointwiseWeight::Kind::per_point_dense: {
      std::vector<Eigen::MatrixXd> mid(e.blocks.size());
      for (std::size_t pt = 0; pt < e.blocks.size(); ++pt)
        mid[pt] = e.blocks[pt].block(1, 1, 6, 6);
      return pointwise_weight(e.grid, pair, std::move(mid));
    }
  }
  throw WeightError("middle_weight: unknown weight kind");
}

}  // namespace detail

// For scalar-slot-free F and block-structured E: solves eq (d0 + B_Max)V = F,
// asserts the scalar slots stay below 1e-12 and that (V1,V2) matches the
// two-component solve with the middle block of E to 1e-10.
inline BlockReductionReport block_reduction_check(const SourceTerm& F,
                                                  const PointwiseWeight& e,
                                                  const TimeGrid& tg) {
  detail::require_impulse_free(F, "block_reduction_check");
  detail::require_reduction_form(e);
  const VectorCalculus vc = vector_calculus(e.grid);
  const Layout ext = extended_layout(vc);
  require_same_layout(e.lay, ext, "block_reduction_check");

  const BlockOp amax = assemble_block(Tag::AMax, vc);
  const BlockOp bmax = conjugate_weighted({{&amax, Side::inverse}}, e);
  const Trajectory V = solve_implicit_euler(identity_law(e.grid, ext), bmax, F, tg);

  BlockReductionReport rep;
  for (const Vec& u : V.samples) {
    rep.max_scalar_norm = std::max(rep.max_scalar_norm, grid_norm(e.grid, ext.take(u, 0)));
    rep.max_scalar_norm = std::max(rep.max_scalar_norm, grid_norm(e.grid, ext.take(u, 3)));
  }
  if (rep.max_scalar_norm > 1e-12) {
    rep.ok = false;
    rep.failed = "scalar slots";
  }

  // Two-component reference solve with M0 = middle block of E.
  const PointwiseWeight m0 = detail::middle_weight(e, vc);
  const BlockOp amax2 = assemble_maxwell_op(vc);
  const BlockOp b2 = conjugate_weighted({{&amax2, Side::inverse}}, m0);
  const Layout pair = maxwell_layout(vc);
  SourceTerm F2 = SourceTerm::zero(pair.dim());
  if (!F.regular.empty()) {
    F2.regular.resize(F.regular.size());
    for (std::size_t n = 0; n < F.regular.size(); ++n) {
      Vec f2(pair.dim());
      const Vec f1 = ext.take(F.regular[n], 1);
      const Vec fh = ext.take(F.regular[n], 2);
      std::copy(f1.begin(), f1.end(), f2.begin());
      std::copy(fh.begin(), fh.end(), f2.begin() + long(vc.v1.dim));
      F2.regular[n] = std::move(f2);
    }
  }
  const Trajectory W = solve_implicit_euler(identity_law(e.grid, pair), b2, F2, tg);
  for (int n = 0; n < tg.steps; ++n) {
    const Vec& u = V.samples[std::size_t(n)];
    const Vec& w = W.samples[std::size_t(n)];
    Vec pairv(pair.dim());
    const Vec v1 = ext.take(u, 1);
    const Vec v2 = ext.take(u, 2);
    std::copy(v1.begin(), v1.end(), pairv.begin());
    std::copy(v2.begin(), v2.end(), pairv.begin() + long(vc.v1.dim));
    rep.max_pair_dev = std::max(rep.max_pair_dev, grid_norm(e.grid, pairv - w));
  }
  if (rep.max_pair_dev > 1e-10) {
    rep.ok = false;
    if (!rep.failed.empty()) rep.failed += " and ";
    rep.failed += "pair match";
  }
  return rep;
}

// --- GEM transfer ----------------------------------------------------------------

enum class TransferDirection { to_reduced, to_full };

namespace detail {

// The pairwise-annihilation block form: no coupling between the upper
// (scalar, v1) and lower (v2, scalar) component halves.
inline void require_gem_form(const PointwiseWeight& e) {
  if (e.kind != PointwiseWeight::Kind::per_point_dense) return;
  for (std::size_t pt = 0; pt < e.blocks.size(); ++pt)
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        if ((r < 4) != (c < 4) && e.blocks[pt](r, c) != 0.0)
          throw WeightError(
              "gem_transfer: weight couples the upper and lower component halves at "
              "point " + std::to_string(pt) + " (use build_gem_material)");
}

}  // namespace detail

// to_reduced: F := d0 (d0 + sqrt(E)A_Nac sqrt(E))^{-1} Ftilde — the full
// extended solution then satisfies the A_Nac-free system with source F.
// to_full:    Ftilde := (1 + d0^{-1} sqrt(E)A_Nac sqrt(E)) F — the A_Nac-free
// solution then satisfies the full extended system with source Ftilde.
inline SourceTerm gem_transfer(const SourceTerm& f, const PointwiseWeight& e,
                               const TimeGrid& tg, TransferDirection dir) {
  detail::require_impulse_free(f, "gem_transfer");
  detail::require_gem_form(e);
  const VectorCalculus vc = vector_calculus(e.grid);
  require_same_layout(e.lay, extended_layout(vc), "gem_transfer");
  const BlockOp anac = assemble_block(Tag::ANac, vc);
  const BlockOp B = conjugate_weighted({{&anac, Side::direct}}, e);
  if (dir == TransferDirection::to_reduced)
    return detail::factor_off(f, identity_law(e.grid, e.lay), B, tg);
  return detail::reattach(f, B, tg);
}

// --- invariants -------------------------------------------------------------------

// max_n || ((d0 + B1)(d0 + B2) - d0 (d0 + B1 + B2)) u ||_inf on a given
// sequence; exactly the discrete form of the proof's factorization display.
inline double factorization_residual(const SparseOp& B1, const SparseOp& B2,
                                     const TimeGrid& tg, const std::vector<Vec>& u) {
  const auto du = d0_apply(tg, u);
  std::vector<Vec> inner(u.size()), sum(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    inner[n] = du[n] + B2.apply(u[n]);
    sum[n] = du[n] + B1.apply(u[n]) + B2.apply(u[n]);
  }
  const auto dinner = d0_apply(tg, inner);
  const auto dsum = d0_apply(tg, sum);
  double worst = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const Vec lhs = dinner[n] + B1.apply(inner[n]);
    worst = std::max(worst, max_abs(lhs - dsum[n]));
  }
  return worst;
}

// --- system instances (CLI-facing) ------------------------------------------------

enum class SystemKind { maxwell, extended, gem };

struct SystemInstance {
  SystemKind kind = SystemKind::maxwell;
  GridSpec grid;
  Layout lay;
  BlockOp op;       // assembled (weighted) spatial operator
  MaterialLaw law;  // mass law used by the integrators
};

inline SystemInstance make_maxwell_instance(const MaterialLaw& law, const GridSpec& grid) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(law.lay, maxwell_layout(vc), "make_maxwell_instance");
  return {SystemKind::maxwell, grid, law.lay, assemble_maxwell_op(vc), law};
}

inline SystemInstance make_extended_instance(const PointwiseWeight& e, const GridSpec& grid) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(e.lay, extended_layout(vc), "make_extended_instance");
  return {SystemKind::extended, grid, e.lay, extended_weighted_op(e, vc),
          identity_law(grid, e.lay)};
}

inline SystemInstance make_gem_instance(const PointwiseWeight& c, const GridSpec& grid) {
  const VectorCalculus vc = vector_calculus(grid);
  require_same_layout(c.lay, gem_layout(vc), "make_gem_instance");
  return {SystemKind::gem, grid, c.lay, gem_weighted_op(c, vc), identity_law(grid, c.lay)};
}

}  // namespace evomax
