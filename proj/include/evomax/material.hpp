#pragma once
// Affine material laws M0 + d0^{-1} M1 with hypothesis certification:
//   (H1) M0 = M0^T exactly,
//   (H2) nu*M0 + sym(M1) >= c0 > 0 pointwise, c0 the certified global minimum.
//
// Laws are pointwise: either per-dof diagonal coefficients (both backends;
// the minimum is computed exactly in floating arithmetic, no eigensolve) or
// per-point dense blocks on the collocated periodic layout (small symmetric
// eigensolve per point).

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "block.hpp"
#include "grid.hpp"
#include "sparse.hpp"
#include "weights.hpp"

namespace evomax {

struct H1Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct H2Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaterialLaw {
  enum class Kind { diagonal, pointwise };
  Kind kind = Kind::diagonal;
  GridSpec grid;
  Layout lay;
  // diagonal kind: per-dof coefficients
  Vec m0_diag, m1_diag;
  // pointwise kind: per-point dense blocks, component-major collocated layout
  std::size_t npoints = 0;
  std::vector<Eigen::MatrixXd> m0_blocks, m1_blocks;
  // assembled operators
  SparseOp M0, M1;
};

struct PositivityReport {
  double nu = 0.0;
  double c0 = 0.0;
  double min_eig_estimate = 0.0;
  std::string method;
};

inline MaterialLaw identity_law(const GridSpec& g, const Layout& lay) {
  MaterialLaw law;
  law.kind = MaterialLaw::Kind::diagonal;
  law.grid = g;
  law.lay = lay;
  law.m0_diag.assign(lay.dim(), 1.0);
  law.m1_diag.assign(lay.dim(), 0.0);
  law.M0 = SparseOp::identity(lay.flat);
  law.M1 = SparseOp::zero(lay.flat, lay.flat);
  return law;
}

inline MaterialLaw diagonal_law(const GridSpec& g, const Layout& lay, Vec m0, Vec m1) {
  if (m0.size() != lay.dim() || m1.size() != lay.dim())
    throw DimError("diagonal_law: coefficient size vs layout dim " + std::to_string(lay.dim()));
  MaterialLaw law;
  law.kind = MaterialLaw::Kind::diagonal;
  law.grid = g;
  law.lay = lay;
  law.M0 = SparseOp::diagonal(lay.flat, m0);
  law.M1 = SparseOp::diagonal(lay.flat, m1);
  law.m0_diag = std::move(m0);
  law.m1_diag = std::move(m1);
  return law;
}

inline MaterialLaw pointwise_law(const GridSpec& g, const Layout& lay,
                                 std::vector<Eigen::MatrixXd> m0b,
                                 std::vector<Eigen::MatrixXd> m1b) {
  const std::size_t N = m0b.size();
  if (N == 0 || m1b.size() != N || lay.dim() % N != 0)
    throw DimError("pointwise_law: block counts do not match layout");
  detail::CompMap cm(lay, N);
  const std::size_t k = lay.dim() / N;
  MaterialLaw law;
  law.kind = MaterialLaw::Kind::pointwise;
  law.grid = g;
  law.lay = lay;
  law.npoints = N;
  std::vector<Triplet<double>> t0, t1;
  for (std::size_t pt = 0; pt < N; ++pt) {
    if (m0b[pt].rows() != long(k) || m0b[pt].cols() != long(k) ||
        m1b[pt].rows() != long(k) || m1b[pt].cols() != long(k))
      throw DimError("pointwise_law: block size mismatch at point " + std::to_string(pt));
    for (std::size_t ci = 0; ci < k; ++ci)
      for (std::size_t cj = 0; cj < k; ++cj) {
        const auto r = std::uint32_t(cm.dof(lay, ci, pt));
        const auto c = std::uint32_t(cm.dof(lay, cj, pt));
        if (m0b[pt](ci, cj) != 0.0) t0.push_back({r, c, m0b[pt](ci, cj)});
        if (m1b[pt](ci, cj) != 0.0) t1.push_back({r, c, m1b[pt](ci, cj)});
      }
  }
  law.M0 = SparseOp::from_triplets(lay.flat, lay.flat, std::move(t0));
  law.M1 = SparseOp::from_triplets(lay.flat, lay.flat, std::move(t1));
  law.m0_blocks = std::move(m0b);
  law.m1_blocks = std::move(m1b);
  return law;
}

// (H1): exact symmetry of M0.  (H2): per-point minimum eigenvalue of
// nu*M0 + (M1 + M1^T)/2, certified as c0 > 0.
inline PositivityReport verify_H1_H2(const MaterialLaw& law, double nu) {
  const double h1 = (law.M0 - law.M0.transpose()).max_abs();
  if (h1 != 0.0)
    throw H1Error("H1 violation: max |M0 - M0^T| = " + std::to_string(h1));

  PositivityReport rep;
  rep.nu = nu;
  if (law.kind == MaterialLaw::Kind::diagonal) {
    bool first = true;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < law.lay.dim(); ++i) {
      const double v = nu * law.m0_diag[i] + law.m1_diag[i];
      if (first || v < rep.c0) {
        rep.c0 = v;
        argmin = i;
        first = false;
      }
    }
    rep.min_eig_estimate = rep.c0;
    rep.method = "diagonal minimum";
    if (!(rep.c0 > 0.0))
      throw H2Error("H2 violation at dof " + std::to_string(argmin) +
                    ": nu*m0 + m1 = " + std::to_string(rep.c0));
    return rep;
  }

  bool first = true;
  std::size_t argmin = 0;
  for (std::size_t pt = 0; pt < law.npoints; ++pt) {
    const Eigen::MatrixXd sym =
        nu * law.m0_blocks[pt] +
        0.5 * (law.m1_blocks[pt] + law.m1_blocks[pt].transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double lmin = es.eigenvalues().minCoeff();
    if (first || lmin < rep.c0) {
      rep.c0 = lmin;
      argmin = pt;
      first = false;
    }
  }
  rep.min_eig_estimate = rep.c0;
  rep.method = "per-point dense eigensolve";
  if (!(rep.c0 > 0.0))
    throw H2Error("H2 violation at point " + std::to_string(argmin) +
                  ": min eigenvalue " + std::to_string(rep.c0));
  return rep;
}

// Maxwell field layout: vector(1st kind) + vector(2nd kind), i.e. (E, H).
inline Layout maxwell_layout(const VectorCalculus& vc) {
  return Layout::of("max(" + vc.grid.label() + ")", {vc.v1, vc.v2});
}

// Eddy-current preset M0 = diag(0, mu), M1 = diag(sigma, 0) on (E, H).
// With (H2): c0 = min(min sigma, nu * min mu), reproduced exactly by the
// diagonal certification path.
inline MaterialLaw eddy_current_preset(const VectorCalculus& vc, const Vec& sigma,
                                       const Vec& mu) {
  const Layout lay = maxwell_layout(vc);
  if (sigma.size() != vc.v1.dim || mu.size() != vc.v2.dim)
    throw DimError("eddy_current_preset: sigma on " + describe(vc.v1) + ", mu on " +
                   describe(vc.v2));
  for (double s : sigma)
    if (!(s > 0.0)) throw std::runtime_error("eddy_current_preset: sigma must be positive");
  for (double m : mu)
    if (!(m > 0.0)) throw std::runtime_error("eddy_current_preset: mu must be positive");
  Vec m0(lay.dim(), 0.0), m1(lay.dim(), 0.0);
  for (std::size_t i = 0; i < sigma.size(); ++i) m1[lay.offset(0) + i] = sigma[i];
  for (std::size_t i = 0; i < mu.size(); ++i) m0[lay.offset(1) + i] = mu[i];
  return diagonal_law(vc.grid, lay, std::move(m0), std::move(m1));
}

// GEM weight of the 7+1-component embedding:
//   E = [[Cblk, (0,0,S)^T], [(0,0,S^T), K]]
// with Cblk = [[C00,C01,0],[C10,C11,0],[0,0,C22]] (7x7, per point), K scalar,
// S a 3-column coupling into the second vector block.  Validated per point:
// Cblk block structure, SPD, and the Schur condition K - S^T C22^{-1} S > 0.
inline PointwiseWeight build_gem_material(const VectorCalculus& vc,
                                          const std::vector<Eigen::MatrixXd>& Cblk,
                                          const Vec& K,
                                          const std::vector<Eigen::Vector3d>& S_gem) {
  if (vc.grid.backend != Backend::periodic)
    throw WeightError("build_gem_material: periodic backend required");
  const std::size_t N = Cblk.size();
  if (K.size() != N || S_gem.size() != N)
    throw DimError("build_gem_material: per-point data sizes disagree");
  const Layout ext = extended_layout(vc);
  std::vector<Eigen::MatrixXd> blocks(N);
  for (std::size_t pt = 0; pt < N; ++pt) {
    const Eigen::MatrixXd& C = Cblk[pt];
    if (C.rows() != 7 || C.cols() != 7)
      throw DimError("build_gem_material: Cblk must be 7x7 per point");
    // Required zero pattern: no coupling between (scalar + first vector) and
    // the second vector block.
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c) {
        const bool upper = r < 4, cupper = c < 4;
        if (upper != cupper && C(r, c) != 0.0)
          throw WeightError("build_gem_material: Cblk violates the block form at point " +
                            std::to_string(pt));
      }
    const Eigen::Matrix3d C22 = C.block<3, 3>(4, 4);
    const Eigen::Vector3d s = S_gem[pt];
    const double schur = K[pt] - s.dot(C22.ldlt().solve(s));
    if (!(schur > 0.0))
      throw WeightError("build_gem_material: Schur condition violated at point " +
                        std::to_string(pt) + " (value " + std::to_string(schur) + ")");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(8, 8);
    B.block<7, 7>(0, 0) = C;
    B.block<3, 1>(4, 7) = s;
    B.block<1, 3>(7, 4) = s.transpose();
    B(7, 7) = K[pt];
    blocks[pt] = 0.5 * (B + B.transpose());
  }
  return pointwise_weight(vc.grid, ext, std::move(blocks));
}

}  // namespace evomax
