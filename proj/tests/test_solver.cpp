// Causal integrators: conservation/dissipation structure, causality, impulse
// realization, the discrete derivative pair, and the weighted a-priori bound.
#include <catch2/catch_amalgamated.hpp>

#include "evomax/rng.hpp"
#include "evomax/solver.hpp"

using namespace evomax;

namespace {

GridSpec periodic(int n) { return GridSpec{Backend::periodic, {n, n, n}, 1.0 / n}; }

struct Setup {
  VectorCalculus vc;
  Layout ext;
  BlockOp A;
  MaterialLaw law;
};

Setup extended_setup(int n) {
  Setup s{vector_calculus(periodic(n)), {}, {}, {}};
  s.ext = extended_layout(s.vc);
  s.A = assemble_block(Tag::Extended, s.vc);
  s.law = identity_law(s.vc.grid, s.ext);
  return s;
}

double energy(const MaterialLaw& law, const Vec& u) { return dot(u, law.M0.apply(u)); }

}  // namespace

TEST_CASE("time grid and source validation") {
  TimeGrid bad{1.0, 10, 0.0, 1.0};  // tau*nu = 1 violates the weighted coercivity
  REQUIRE_THROWS(bad.validate());
  TimeGrid ok{0.5, 10, 0.0, 1.0};
  REQUIRE_NOTHROW(ok.validate());

  SourceTerm f = SourceTerm::zero(4);
  f.impulses.push_back({12, Vec(4, 1.0)});
  REQUIRE_THROWS(f.validate(TimeGrid{0.1, 10, 0.0, 0.0}));
  f.impulses[0].first = 3;
  f.regular.assign(7, Vec(4, 0.0));
  REQUIRE_THROWS(f.validate(TimeGrid{0.1, 10, 0.0, 0.0}));  // 7 samples, 10 steps
}

TEST_CASE("Crank-Nicolson conserves the M0 energy for skew A over 200 steps") {
  const Setup s = extended_setup(3);
  const TimeGrid tg{0.1, 200, 0.0, 0.0};
  Rng rng(101);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.impulses.push_back({0, rng.vector(s.ext.dim())});

  const Trajectory traj = solve_crank_nicolson(s.law, s.A, f, tg);
  const double e0 = energy(s.law, traj.samples[0]);
  REQUIRE(e0 > 0.0);
  for (const Vec& u : traj.samples) {
    const double e = energy(s.law, u);
    REQUIRE(std::abs(e - e0) <= 1e-12 * e0);
  }
}

TEST_CASE("implicit Euler dissipates the M0 energy monotonically") {
  const Setup s = extended_setup(3);
  const TimeGrid tg{0.1, 100, 0.0, 0.0};
  Rng rng(102);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.impulses.push_back({0, rng.vector(s.ext.dim())});

  const Trajectory traj = solve_implicit_euler(s.law, s.A, f, tg);
  double prev = energy(s.law, traj.samples[0]);
  REQUIRE(prev > 0.0);
  for (std::size_t n = 1; n < traj.samples.size(); ++n) {
    const double e = energy(s.law, traj.samples[n]);
    REQUIRE(e <= prev * (1.0 + 1e-12));
    prev = e;
  }
  // Strict dissipation actually occurs (A couples the components).
  REQUIRE(prev < 0.999 * energy(s.law, traj.samples[0]));
}

TEST_CASE("Crank-Nicolson dissipates when sym(M1) is positive semidefinite") {
  const Setup s = extended_setup(3);
  MaterialLaw law = diagonal_law(s.vc.grid, s.ext, Vec(s.ext.dim(), 1.0),
                                 Vec(s.ext.dim(), 0.5));
  const TimeGrid tg{0.1, 50, 0.0, 0.0};
  Rng rng(103);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.impulses.push_back({0, rng.vector(s.ext.dim())});
  const Trajectory traj = solve_crank_nicolson(law, s.A, f, tg);
  double prev = energy(law, traj.samples[0]);
  for (std::size_t n = 1; n < traj.samples.size(); ++n) {
    const double e = energy(law, traj.samples[n]);
    REQUIRE(e <= prev * (1.0 + 1e-12));
    prev = e;
  }
}

TEST_CASE("exponential propagator preserves the norm for skew A") {
  const Setup s = extended_setup(3);  // dim 216 <= 4096
  const TimeGrid tg{0.1, 200, 0.0, 0.0};
  Rng rng(104);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.impulses.push_back({0, rng.vector(s.ext.dim())});
  const Trajectory traj = solve_exponential(s.A, f, tg);
  REQUIRE(traj.warnings.empty());
  const double n0 = norm2(traj.samples[0]);
  for (const Vec& u : traj.samples)
    REQUIRE(std::abs(norm2(u) - n0) <= 1e-11 * n0);
}

TEST_CASE("exponential propagator rejects dimensions above 4096 and warns on non-skew") {
  const Setup big = extended_setup(9);  // 8 * 729 = 5832
  const TimeGrid tg{0.1, 2, 0.0, 0.0};
  REQUIRE_THROWS_MATCHES(
      solve_exponential(big.A, SourceTerm::zero(big.ext.dim()), tg), std::runtime_error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("4096")));

  const Setup s = extended_setup(2);
  BlockOp not_skew = s.A;
  not_skew.flat = SparseOp::identity(s.ext.flat);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.regular.assign(2, Vec(s.ext.dim(), 1.0));
  const Trajectory traj = solve_exponential(not_skew, f, TimeGrid{0.1, 2, 0.0, 0.0});
  REQUIRE(traj.warnings.size() == 1);
  REQUIRE_THAT(traj.warnings[0], Catch::Matchers::ContainsSubstring("not skew"));
}

TEST_CASE("impulse at step k equals a regular source F^k = v/tau bitwise") {
  const Setup s = extended_setup(3);
  const TimeGrid tg{0.05, 12, 0.0, 0.0};
  Rng rng(105);
  const Vec v = rng.vector(s.ext.dim());

  SourceTerm fi = SourceTerm::zero(s.ext.dim());
  fi.impulses.push_back({4, v});

  SourceTerm fr = SourceTerm::zero(s.ext.dim());
  fr.regular.assign(std::size_t(tg.steps), Vec(s.ext.dim(), 0.0));
  for (std::size_t i = 0; i < v.size(); ++i)
    fr.regular[4][i] += (1.0 / tg.tau) * v[i];  // same expression as the solver's axpy

  const Trajectory a = solve_implicit_euler(s.law, s.A, fi, tg);
  const Trajectory b = solve_implicit_euler(s.law, s.A, fr, tg);
  for (int n = 0; n < tg.steps; ++n)
    REQUIRE(max_abs(a.samples[std::size_t(n)] - b.samples[std::size_t(n)]) == 0.0);
}

TEST_CASE("causality: zero state before the source support, all integrators") {
  const Setup s = extended_setup(3);
  const TimeGrid tg{0.1, 12, 0.0, 0.0};
  Rng rng(106);
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.regular.assign(std::size_t(tg.steps), Vec(s.ext.dim(), 0.0));
  for (int n = 5; n < tg.steps; ++n) f.regular[std::size_t(n)] = rng.vector(s.ext.dim());
  f.impulses.push_back({7, rng.vector(s.ext.dim())});

  const auto ie = [&](const SourceTerm& src) {
    return solve_implicit_euler(s.law, s.A, src, tg);
  };
  const auto cn = [&](const SourceTerm& src) {
    return solve_crank_nicolson(s.law, s.A, src, tg);
  };
  const auto ex = [&](const SourceTerm& src) { return solve_exponential(s.A, src, tg); };
  for (const auto& solver :
       std::vector<std::function<Trajectory(const SourceTerm&)>>{ie, cn, ex}) {
    const CausalityResult res = causality_check(solver, f, 5);
    REQUIRE(res.ok);
    REQUIRE(res.first_nonzero_step == -1);
    // State at the first support step is genuinely nonzero.
    REQUIRE(max_abs(solver(f).samples[5]) > 0.0);
  }

  SourceTerm early = f;
  early.impulses[0].first = 3;
  REQUIRE_THROWS(causality_check(ie, early, 5));
}

TEST_CASE("d0 and its causal inverse invert each other") {
  const TimeGrid tg{0.1, 20, 0.0, 0.0};
  Rng rng(107);
  std::vector<Vec> u(20);
  for (auto& x : u) x = rng.vector(6);

  const auto round1 = d0_apply(tg, d0_inverse_apply(tg, u));
  const auto round2 = d0_inverse_apply(tg, d0_apply(tg, u));
  for (std::size_t n = 0; n < u.size(); ++n) {
    REQUIRE(max_abs(round1[n] - u[n]) <= 1e-12);
    REQUIRE(max_abs(round2[n] - u[n]) <= 1e-12);
  }
}

TEST_CASE("weighted norm: exact on a constant power-of-two sample set") {
  const GridSpec g = periodic(2);  // h^3 = 1/8, 8 nodes
  const TimeGrid tg{0.25, 4, 0.0, 0.0};
  std::vector<Vec> u(4, Vec(8, 1.0));
  REQUIRE(weighted_norm_samples(g, tg, u) == 1.0);
}

TEST_CASE("implicit Euler satisfies the weighted a-priori bound") {
  const Setup s = extended_setup(3);
  Rng rng(108);
  for (int run = 0; run < 5; ++run) {
    const TimeGrid tg{0.05 + 0.01 * run, 30, 0.0, 1.0};
    SourceTerm f = SourceTerm::zero(s.ext.dim());
    f.regular.assign(std::size_t(tg.steps), Vec());
    for (auto& x : f.regular) x = rng.vector(s.ext.dim());
    const Trajectory traj = solve_implicit_euler(s.law, s.A, f, tg);
    const PositivityReport rep = verify_H1_H2(s.law, tg.nu);
    const BoundCheck bc = solution_bound_check(traj, f, s.law, rep);
    REQUIRE(bc.ok);
    REQUIRE(bc.c_eff > 0.0);
    REQUIRE(bc.lhs <= bc.rhs * (1.0 + 1e-9));
  }

  // Impulses are outside the bound's hypotheses.
  SourceTerm fi = SourceTerm::zero(s.ext.dim());
  fi.impulses.push_back({0, Vec(s.ext.dim(), 1.0)});
  const TimeGrid tg{0.05, 10, 0.0, 1.0};
  const Trajectory traj = solve_implicit_euler(s.law, s.A, fi, tg);
  const PositivityReport rep = verify_H1_H2(s.law, tg.nu);
  REQUIRE_THROWS(solution_bound_check(traj, fi, s.law, rep));
}

TEST_CASE("integrators agree on a smooth problem to their accuracy order") {
  const Setup s = extended_setup(3);
  const TimeGrid tg{0.02, 25, 0.0, 0.0};
  Rng rng(109);
  const Vec profile = rng.vector(s.ext.dim());
  SourceTerm f = SourceTerm::zero(s.ext.dim());
  f.regular.assign(std::size_t(tg.steps), Vec());
  for (int n = 0; n < tg.steps; ++n)
    f.regular[std::size_t(n)] = scaled(profile, std::sin(tg.time(n) + 0.3));

  const Trajectory ie = solve_implicit_euler(s.law, s.A, f, tg);
  const Trajectory cn = solve_crank_nicolson(s.law, s.A, f, tg);
  const Trajectory ex = solve_exponential(s.A, f, tg);
  const std::size_t last = std::size_t(tg.steps - 1);
  const double scale = std::max(1.0, norm2(ex.samples[last]));
  REQUIRE(norm2(ie.samples[last] - ex.samples[last]) / scale < 0.05);
  REQUIRE(norm2(cn.samples[last] - ex.samples[last]) / scale < 0.002);
  REQUIRE(norm2(cn.samples[last] - ex.samples[last]) <
          0.2 * norm2(ie.samples[last] - ex.samples[last]));
  REQUIRE(ie.max_step_residual <= 1e-12);
  REQUIRE(cn.max_step_residual <= 1e-12);
}
