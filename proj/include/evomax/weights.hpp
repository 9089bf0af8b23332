#pragma once
// Pointwise SPD weights (the operator E of the weighted systems) with cached
// square root and inverse square root, plus the weighted conjugation
// sqrt(E)^{-1} A sqrt(E)^{-1} + sqrt(E) B sqrt(E).
//
// periodic backend : per-point dense SPD blocks over all components at each
//                    node (component mixing allowed).
// staggered backend: per-component positive scalar fields only (component
//                    fields live on different geometric entities, so a
//                    component-mixing weight is rejected at construction).

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "block.hpp"
#include "grid.hpp"
#include "sparse.hpp"

namespace evomax {

struct WeightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointwiseWeight {
  enum class Kind { per_point_dense, per_component_diagonal, identity };
  Kind kind = Kind::identity;
  GridSpec grid;
  Layout lay;
  std::size_t npoints = 0;                // per_point_dense
  std::vector<Eigen::MatrixXd> blocks;    // per_point_dense
  Vec diag;                               // per_component_diagonal, per dof
  SparseOp W, sqrtW, isqrtW;
  double min_eig = 0.0;

  std::size_t ncomp() const { return npoints ? lay.dim() / npoints : 0; }
};

namespace detail {

// Flat dof index of (component, point) for a collocated layout whose parts
// are all stacks of npoints-sized scalar fields, component-major.
struct CompMap {
  std::vector<std::size_t> comp_base;  // per part
  std::size_t npoints;

  CompMap(const Layout& lay, std::size_t N) : npoints(N) {
    std::size_t base = 0;
    comp_base.reserve(lay.nparts());
    for (const auto& p : lay.parts) {
      if (p.dim % N != 0)
        throw WeightError("weight layout: part " + describe(p) +
                          " is not a stack of " + std::to_string(N) + "-point fields");
      comp_base.push_back(base);
      base += p.dim / N;
    }
  }

  std::size_t dof(const Layout& lay, std::size_t comp, std::size_t pt) const {
    for (std::size_t p = 0; p < lay.nparts(); ++p) {
      const std::size_t cnt = lay.parts[p].dim / npoints;
      if (comp < comp_base[p] + cnt)
        return lay.offset(p) + (comp - comp_base[p]) * npoints + pt;
    }
    throw WeightError("weight layout: component index out of range");
  }
};

}  // namespace detail

inline PointwiseWeight identity_weight(const GridSpec& g, const Layout& lay) {
  PointwiseWeight w;
  w.kind = PointwiseWeight::Kind::identity;
  w.grid = g;
  w.lay = lay;
  w.W = SparseOp::identity(lay.flat);
  w.sqrtW = w.W;
  w.isqrtW = w.W;
  w.min_eig = 1.0;
  return w;
}

// Per-dof positive diagonal weight (usable on both backends).
inline PointwiseWeight diag_weight(const GridSpec& g, const Layout& lay, Vec d) {
  if (d.size() != lay.dim())
    throw WeightError("diag_weight: " + std::to_string(d.size()) + " values for layout of dim " +
                      std::to_string(lay.dim()));
  PointwiseWeight w;
  w.kind = PointwiseWeight::Kind::per_component_diagonal;
  w.grid = g;
  w.lay = lay;
  w.diag = std::move(d);
  w.min_eig = w.diag.empty() ? 0.0 : w.diag[0];
  Vec s(w.diag.size()), is(w.diag.size());
  for (std::size_t i = 0; i < w.diag.size(); ++i) {
    if (!(w.diag[i] > 0.0))
      throw WeightError("diag_weight: not strictly positive definite at dof " +
                        std::to_string(i) + " (value " + std::to_string(w.diag[i]) + ")");
    w.min_eig = std::min(w.min_eig, w.diag[i]);
    s[i] = std::sqrt(w.diag[i]);
    is[i] = 1.0 / s[i];
  }
  w.W = SparseOp::diagonal(lay.flat, w.diag);
  w.sqrtW = SparseOp::diagonal(lay.flat, s);
  w.isqrtW = SparseOp::diagonal(lay.flat, is);
  return w;
}

// Per-point dense SPD blocks on a collocated (periodic) layout.
inline PointwiseWeight pointwise_weight(const GridSpec& g, const Layout& lay,
                                        std::vector<Eigen::MatrixXd> blocks) {
  if (g.backend != Backend::periodic)
    throw WeightError(
        "pointwise_weight: component-mixing weights are rejected on the bounded "
        "backend (fields live on different entities); use per-component scalar fields");
  const std::size_t N = blocks.size();
  if (N == 0 || lay.dim() % N != 0)
    throw WeightError("pointwise_weight: block count " + std::to_string(N) +
                      " does not divide layout dim " + std::to_string(lay.dim()));
  const std::size_t k = lay.dim() / N;
  detail::CompMap cm(lay, N);

  PointwiseWeight w;
  w.kind = PointwiseWeight::Kind::per_point_dense;
  w.grid = g;
  w.lay = lay;
  w.npoints = N;
  w.min_eig = 0.0;

  std::vector<Triplet<double>> tw, ts, ti;
  bool first = true;
  std::vector<Eigen::MatrixXd> sqrt_blocks(N), isqrt_blocks(N);
  for (std::size_t pt = 0; pt < N; ++pt) {
    const Eigen::MatrixXd& B = blocks[pt];
    if (B.rows() != long(k) || B.cols() != long(k))
      throw WeightError("pointwise_weight: block at point " + std::to_string(pt) +
                        " has wrong size");
    if ((B - B.transpose()).cwiseAbs().maxCoeff() != 0.0)
      throw WeightError("pointwise_weight: block at point " + std::to_string(pt) +
                        " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmin > 0.0))
      throw WeightError("pointwise_weight: not strictly positive definite at point " +
                        std::to_string(pt) + " (min eigenvalue " + std::to_string(lmin) + ")");
    w.min_eig = first ? lmin : std::min(w.min_eig, lmin);
    first = false;
    Eigen::VectorXd sq = es.eigenvalues().cwiseSqrt();
    sqrt_blocks[pt] = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
    isqrt_blocks[pt] = es.eigenvectors() * sq.cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
    const double rel = (sqrt_blocks[pt] * sqrt_blocks[pt] - B).cwiseAbs().maxCoeff();
    if (rel > 1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff()))
      throw WeightError("pointwise_weight: sqrt check failed at point " + std::to_string(pt));
    for (std::size_t ci = 0; ci < k; ++ci)
      for (std::size_t cj = 0; cj < k; ++cj) {
        const auto r = std::uint32_t(cm.dof(lay, ci, pt));
        const auto c = std::uint32_t(cm.dof(lay, cj, pt));
        if (B(ci, cj) != 0.0) tw.push_back({r, c, B(ci, cj)});
        if (sqrt_blocks[pt](ci, cj) != 0.0) ts.push_back({r, c, sqrt_blocks[pt](ci, cj)});
        if (isqrt_blocks[pt](ci, cj) != 0.0) ti.push_back({r, c, isqrt_blocks[pt](ci, cj)});
      }
  }
  w.blocks = std::move(blocks);
  w.W = SparseOp::from_triplets(lay.flat, lay.flat, std::move(tw));
  w.sqrtW = SparseOp::from_triplets(lay.flat, lay.flat, std::move(ts));
  w.isqrtW = SparseOp::from_triplets(lay.flat, lay.flat, std::move(ti));
  return w;
}

// Principal square root as a weight in its own right.
inline PointwiseWeight sqrtm_pointwise(const PointwiseWeight& e) {
  switch (e.kind) {
    case PointwiseWeight::Kind::identity:
      return e;
    case PointwiseWeight::Kind::per_component_diagonal: {
      Vec s(e.diag.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(e.diag[i]);
      return diag_weight(e.grid, e.lay, std::move(s));
    }
    case PointwiseWeight::Kind::per_point_dense: {
      std::vector<Eigen::MatrixXd> roots(e.blocks.size());
      for (std::size_t pt = 0; pt < e.blocks.size(); ++pt) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.blocks[pt]);
        const double lmin = es.eigenvalues().minCoeff();
        if (!(lmin > 0.0))
          throw WeightError("sqrtm_pointwise: indefinite block at point " +
                            std::to_string(pt) + " (min eigenvalue " +
                            std::to_string(lmin) + ")");
        Eigen::MatrixXd root = es.eigenvectors() *
                               es.eigenvalues().cwiseSqrt().asDiagonal() *
                               es.eigenvectors().transpose();
        // Exact symmetry for the downstream constructor.
        roots[pt] = 0.5 * (root + root.transpose());
      }
      return pointwise_weight(e.grid, e.lay, std::move(roots));
    }
  }
  throw WeightError("sqrtm_pointwise: unknown kind");
}

enum class Side { inverse, direct };

// sum over parts of sqrt(E)^{±1} A sqrt(E)^{±1}.
inline BlockOp conjugate_weighted(
    const std::vector<std::pair<const BlockOp*, Side>>& parts,
    const PointwiseWeight& e) {
  if (parts.empty()) throw WeightError("conjugate_weighted: no parts");
  for (const auto& [op, side] : parts) {
    (void)side;
    require_same_layout(op->rows, e.lay, "conjugate_weighted(rows)");
    require_same_layout(op->cols, e.lay, "conjugate_weighted(cols)");
  }
  BlockOp out;
  out.tag = parts.size() == 1 ? parts[0].first->tag : Tag::Custom;
  out.grid = e.grid;
  out.rows = e.lay;
  out.cols = e.lay;
  bool first = true;
  for (const auto& [op, side] : parts) {
    const SparseOp& s = (side == Side::inverse) ? e.isqrtW : e.sqrtW;
    SparseOp term = s * op->flat * s;
    out.flat = first ? term : out.flat + term;
    first = false;
  }
  return out;
}

}  // namespace evomax
