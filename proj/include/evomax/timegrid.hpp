#pragma once
// Discrete causal time calculus.
//
// Samples live at t_n = t0 + n*tau for n = 0..N-1 with zero history
// (U^{-1} = 0, encoding support in [t0, inf)).  The discrete derivative is
// the backward difference (d0 u)^n = (u^n - u^{n-1})/tau; its inverse is the
// causal running sum.  delta impulses at step k are injected as F^k += v/tau
// by the implicit schemes (the one-step realization of the jump).

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "block.hpp"
#include "grid.hpp"
#include "sparse.hpp"

namespace evomax {

struct TimeGrid {
  double tau = 0.1;
  int steps = 1;
  double t0 = 0.0;
  double nu = 0.0;

  void validate() const {
    if (!(tau > 0)) throw std::runtime_error("time grid: tau must be positive");
    if (steps < 1) throw std::runtime_error("time grid: steps must be >= 1");
    if (nu < 0) throw std::runtime_error("time grid: nu must be >= 0");
    if (!(tau * nu < 1.0))
      throw std::runtime_error("time grid: tau*nu = " + std::to_string(tau * nu) +
                               " must be < 1 (weighted coercivity)");
  }

  double time(int n) const { return t0 + n * tau; }
};

struct SourceTerm {
  std::size_t dim = 0;
  std::vector<Vec> regular;                 // per-step samples; empty = zero
  std::vector<std::pair<int, Vec>> impulses;  // (step index, vector)

  static SourceTerm zero(std::size_t dim) { return SourceTerm{dim, {}, {}}; }

  Vec at(int n) const {
    if (regular.empty() || n < 0 || std::size_t(n) >= regular.size())
      return Vec(dim, 0.0);
    return regular[std::size_t(n)];
  }

  bool has_impulses() const { return !impulses.empty(); }

  void validate(const TimeGrid& tg) const {
    for (const auto& [k, v] : impulses) {
      if (k < 0 || k >= tg.steps)
        throw std::runtime_error("source: impulse step " + std::to_string(k) +
                                 " outside time grid");
      if (v.size() != dim) throw DimError("source: impulse vector size mismatch");
    }
    for (const auto& f : regular)
      if (f.size() != dim) throw DimError("source: regular sample size mismatch");
    if (!regular.empty() && regular.size() != std::size_t(tg.steps))
      throw std::runtime_error("source: regular part has " + std::to_string(regular.size()) +
                               " samples for " + std::to_string(tg.steps) + " steps");
  }
};

struct Trajectory {
  GridSpec grid;
  Layout lay;
  TimeGrid tg;
  std::vector<Vec> samples;  // n = 0..steps-1
  std::string solver;
  double max_step_residual = 0.0;
  std::vector<int> picard_counts;  // filled by the coupled solver
  std::vector<std::string> warnings;
};

// (d0 u)^n = (u^n - u^{n-1})/tau with zero history.
inline std::vector<Vec> d0_apply(const TimeGrid& tg, const std::vector<Vec>& u) {
  std::vector<Vec> out(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    out[n] = u[n];
    if (n > 0) axpy(out[n], -1.0, u[n - 1]);
    for (auto& x : out[n]) x /= tg.tau;
  }
  return out;
}

// Causal running sum times tau: the solution of d0 v = u.
inline std::vector<Vec> d0_inverse_apply(const TimeGrid& tg, const std::vector<Vec>& u) {
  std::vector<Vec> out(u.size());
  Vec acc;
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (n == 0) acc.assign(u[0].size(), 0.0);
    axpy(acc, tg.tau, u[n]);
    out[n] = acc;
  }
  return out;
}

// (tau * sum_n ||U^n||_{h^3}^2 exp(-2 nu t_n))^{1/2}
inline double weighted_norm_samples(const GridSpec& g, const TimeGrid& tg,
                                    const std::vector<Vec>& u) {
  double s = 0.0;
  const double h3 = g.h * g.h * g.h;
  for (std::size_t n = 0; n < u.size(); ++n)
    s += h3 * dot(u[n], u[n]) * std::exp(-2.0 * tg.nu * tg.time(int(n)));
  return std::sqrt(tg.tau * s);
}

inline double weighted_norm(const Trajectory& traj) {
  return weighted_norm_samples(traj.grid, traj.tg, traj.samples);
}

struct CausalityResult {
  bool ok = true;
  int first_nonzero_step = -1;
  double max_before_support = 0.0;
};

// Runs the solver closure on a source supported in steps >= support_start and
// asserts the state is exactly zero before the support.
inline CausalityResult causality_check(
    const std::function<Trajectory(const SourceTerm&)>& solver, const SourceTerm& f,
    int support_start) {
  for (const auto& [k, v] : f.impulses) {
    (void)v;
    if (k < support_start)
      throw std::runtime_error("causality_check: impulse before declared support");
  }
  for (int n = 0; n < support_start && std::size_t(n) < f.regular.size(); ++n)
    if (max_abs(f.regular[std::size_t(n)]) != 0.0)
      throw std::runtime_error("causality_check: regular source before declared support");
  const Trajectory traj = solver(f);
  CausalityResult res;
  for (int n = 0; n < support_start && std::size_t(n) < traj.samples.size(); ++n) {
    const double m = max_abs(traj.samples[std::size_t(n)]);
    if (m != 0.0) {
      res.ok = false;
      if (res.first_nonzero_step < 0) res.first_nonzero_step = n;
      res.max_before_support = std::max(res.max_before_support, m);
    }
  }
  return res;
}

}  // namespace evomax
