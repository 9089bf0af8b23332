#pragma once
// The Dirac operator in Pauli form and the chain of unitary transformations
//   Q0 -> Q1 -> real form Wtilde -> (M1 + A_spatial),
// verified as matrix identities on the periodic backend (the only backend on
// which the partials are exactly skew).
//
// Complex operators are pairs (re, im) of real sparse operators; realification
// follows the convention (x, y) <-> x + iy, i <-> [[0,-1],[1,0]], with the
// complex component c mapping to real components (2c, 2c+1), each a stack of
// N node values.  Under it, realify(M*) = realify(M)^T.
//
// The final chain identity is checked separately for the constant part (the
// mass term) and the first-order part (the difference stencils); both sides
// of each part live on a single exact integer scale, so the residuals are
// exactly zero independent of the mesh width.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "block.hpp"
#include "complexes.hpp"
#include "grid.hpp"
#include "sparse.hpp"

namespace evomax {

using Cx = std::complex<double>;
using CxVec = std::vector<Cx>;

// --- complex sparse operators ----------------------------------------------

struct CxOp {
  SparseOp re, im;

  CxOp() = default;
  CxOp(SparseOp r, SparseOp i) : re(std::move(r)), im(std::move(i)) {}

  static CxOp real(SparseOp r) {
    SparseOp z = SparseOp::zero(r.rows(), r.cols());
    return CxOp(std::move(r), std::move(z));
  }
  static CxOp zero(const Space& rows, const Space& cols) {
    return CxOp(SparseOp::zero(rows, cols), SparseOp::zero(rows, cols));
  }
  static CxOp identity(const Space& s) { return real(SparseOp::identity(s)); }

  CxOp operator+(const CxOp& b) const { return {re + b.re, im + b.im}; }
  CxOp operator-(const CxOp& b) const { return {re - b.re, im - b.im}; }
  CxOp operator*(const CxOp& b) const {
    return {re * b.re - im * b.im, re * b.im + im * b.re};
  }
  // Multiplication by the complex scalar a + ib.
  CxOp scaled(double a, double b) const {
    return {re.scaled(a) - im.scaled(b), re.scaled(b) + im.scaled(a)};
  }
  CxOp adjoint() const { return {re.transpose(), im.transpose().scaled(-1.0)}; }

  double max_abs() const { return std::max(re.max_abs(), im.max_abs()); }

  CxVec apply(const CxVec& x) const {
    Vec xr(x.size()), xi(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      xr[k] = x[k].real();
      xi[k] = x[k].imag();
    }
    const Vec yr = re.apply(xr) - im.apply(xi);
    const Vec yi = re.apply(xi) + im.apply(xr);
    CxVec y(yr.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = Cx(yr[k], yi[k]);
    return y;
  }
};

// --- Pauli matrices and C(d) -------------------------------------------------

inline std::array<Eigen::Matrix2cd, 3> pauli_matrices() {
  std::array<Eigen::Matrix2cd, 3> p;
  p[0] << Cx(0, 0), Cx(1, 0), Cx(1, 0), Cx(0, 0);
  p[1] << Cx(0, 0), Cx(0, -1), Cx(0, 1), Cx(0, 0);
  p[2] << Cx(1, 0), Cx(0, 0), Cx(0, 0), Cx(-1, 0);
  return p;
}

namespace detail {

inline void require_periodic(const GridSpec& g, const char* what) {
  if (g.backend != Backend::periodic)
    throw std::runtime_error(std::string(what) +
                             ": bounded backend rejected (this module needs exactly "
                             "skew partials, i.e. the periodic backend)");
}

// Stack a k x k complex-block pattern of N x N real operators into one CxOp.
struct CxBuilder {
  Space big;
  std::size_t N;
  std::vector<Triplet<std::int64_t>> re_t, im_t;
  std::vector<Triplet<double>> re_d, im_d;
  bool exact = true;
  double common = 0.0;
  bool has_scale = false;

  CxBuilder(std::string name, std::size_t k, std::size_t n)
      : big{std::move(name), k * n}, N(n) {}

  void place(std::vector<Triplet<std::int64_t>>& ti, std::vector<Triplet<double>>& td,
             const SparseOp& op, std::size_t br, std::size_t bc, std::int64_t factor) {
    if (op.nnz() == 0) return;
    if (exact && op.exact()) {
      if (!has_scale) {
        common = op.scale();
        has_scale = true;
      }
      const double ratio = op.scale() / common;
      if (ratio == std::nearbyint(ratio) && std::abs(ratio) <= (1 << 20) &&
          common * ratio == op.scale()) {
        append_shifted_exact(ti, op, br * N, bc * N, common, factor);
        return;
      }
      downgrade();
    } else if (exact) {
      downgrade();
    }
    append_shifted_general(td, op, br * N, bc * N, double(factor));
  }

  void set_re(const SparseOp& op, std::size_t br, std::size_t bc, std::int64_t f = 1) {
    place(re_t, re_d, op, br, bc, f);
  }
  void set_im(const SparseOp& op, std::size_t br, std::size_t bc, std::int64_t f = 1) {
    place(im_t, im_d, op, br, bc, f);
  }

  void downgrade() {
    if (!exact) return;
    exact = false;
    for (const auto& t : re_t) re_d.push_back({t.r, t.c, double(t.v) * common});
    for (const auto& t : im_t) im_d.push_back({t.r, t.c, double(t.v) * common});
    re_t.clear();
    im_t.clear();
  }

  CxOp build() {
    if (exact) {
      const double s = has_scale ? common : 1.0;
      return {SparseOp::from_int_triplets(big, big, std::move(re_t), s),
              SparseOp::from_int_triplets(big, big, std::move(im_t), s)};
    }
    return {SparseOp::from_triplets(big, big, std::move(re_d)),
            SparseOp::from_triplets(big, big, std::move(im_d))};
  }
};

}  // namespace detail

// C(d) = [[D3, D1 - i D2], [D1 + i D2, -D3]] over 2 complex components.
inline CxOp assemble_C_partial(const GridSpec& g) {
  detail::require_periodic(g, "assemble_C_partial");
  auto D = periodic_partials(g);
  const std::size_t N = PeriodicIndex(g).nodes();
  detail::CxBuilder b("cx2(" + g.label() + ")", 2, N);
  b.set_re(D[2], 0, 0, +1);
  b.set_re(D[0], 0, 1, +1);
  b.set_re(D[0], 1, 0, +1);
  b.set_re(D[2], 1, 1, -1);
  b.set_im(D[1], 0, 1, -1);
  b.set_im(D[1], 1, 0, +1);
  return b.build();
}

enum class QVariant { Q0, Q1 };

// Time-independent part B of Q = d0 + B.
//   Q0: B0 = [[+i, C],[C, -i]];  Q1: B1 = [[0, i - iC],[i + iC, 0]].
inline CxOp assemble_Q(const GridSpec& g, QVariant variant) {
  detail::require_periodic(g, "assemble_Q");
  const CxOp C = assemble_C_partial(g);
  const std::size_t N = PeriodicIndex(g).nodes();
  const Space big{"cx4(" + g.label() + ")", 4 * N};
  const Space half = C.re.rows();

  auto embed = [&](const CxOp& op, std::size_t br, std::size_t bc) {
    // Place a 2-component CxOp into the (br, bc) half of the 4-component one.
    std::vector<Triplet<double>> tr, ti;
    append_shifted_general(tr, op.re, br * 2 * N, bc * 2 * N);
    append_shifted_general(ti, op.im, br * 2 * N, bc * 2 * N);
    return CxOp(SparseOp::from_triplets(big, big, std::move(tr)),
                SparseOp::from_triplets(big, big, std::move(ti)));
  };

  const CxOp I2 = CxOp::identity(half);
  if (variant == QVariant::Q0) {
    CxOp out = embed(C, 0, 1) + embed(C, 1, 0);
    out = out + embed(I2.scaled(0.0, 1.0), 0, 0);
    out = out + embed(I2.scaled(0.0, -1.0), 1, 1);
    return out;
  }
  // i(I - C) in the top-right, i(I + C) in the bottom-left.
  const CxOp iI_minus_iC = (I2 - C).scaled(0.0, 1.0);
  const CxOp iI_plus_iC = (I2 + C).scaled(0.0, 1.0);
  return embed(iI_minus_iC, 0, 1) + embed(iI_plus_iC, 1, 0);
}

// U = (1/sqrt 2) [[i, 1],[i, -1]] blockwise over the two halves.
inline CxOp assemble_U_q01(const GridSpec& g) {
  detail::require_periodic(g, "assemble_U_q01");
  const std::size_t N = PeriodicIndex(g).nodes();
  detail::CxBuilder b("cx4(" + g.label() + ")", 4, N);
  const double s = 1.0 / std::sqrt(2.0);
  // Identity over a half = two diagonal component blocks.
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<Triplet<std::int64_t>> t(N);
    for (std::uint32_t j = 0; j < N; ++j) t[j] = {j, j, 1};
    SparseOp I = SparseOp::from_int_triplets({"sc", N}, {"sc", N}, t, s);
    b.set_im(I, c, c, +1);          // i/sqrt2 upper-left half
    b.set_re(I, c, 2 + c, +1);      // 1/sqrt2 upper-right
    b.set_im(I, 2 + c, c, +1);      // i/sqrt2 lower-left
    b.set_re(I, 2 + c, 2 + c, -1);  // -1/sqrt2 lower-right
  }
  return b.build();
}

// W = i(1 + C); its realification is Wtilde below.
inline CxOp assemble_W(const GridSpec& g) {
  const CxOp C = assemble_C_partial(g);
  return (CxOp::identity(C.re.rows()) + C).scaled(0.0, 1.0);
}

// --- realification ------------------------------------------------------------

// Real form of a complex operator over m complex components of N nodes each:
// complex component c -> real components (2c, 2c+1); entry a + ib becomes
// [[a, -b],[b, a]].
inline SparseOp realify_op(const CxOp& op, std::size_t N, const std::string& name) {
  const std::size_t m = op.re.rows().dim / N;
  const Space big{name, 2 * m * N};
  auto split = [N](std::uint32_t flat, std::size_t& comp, std::size_t& node) {
    comp = flat / N;
    node = flat % N;
  };
  const bool exact =
      op.re.exact() && op.im.exact() &&
      (op.re.nnz() == 0 || op.im.nnz() == 0 || op.re.scale() == op.im.scale());
  if (exact) {
    const double s = op.re.nnz() ? op.re.scale() : op.im.scale();
    std::vector<Triplet<std::int64_t>> t;
    for (std::uint32_t r = 0; r + 1 < op.re.row_ptr().size(); ++r)
      for (std::size_t k = op.re.row_ptr()[r]; k < op.re.row_ptr()[r + 1]; ++k) {
        std::size_t rc, rn, cc, cn;
        split(r, rc, rn);
        split(op.re.col_idx()[k], cc, cn);
        const std::int64_t v = op.re.numerator(k);
        t.push_back({std::uint32_t((2 * rc) * N + rn), std::uint32_t((2 * cc) * N + cn), v});
        t.push_back({std::uint32_t((2 * rc + 1) * N + rn), std::uint32_t((2 * cc + 1) * N + cn), v});
      }
    for (std::uint32_t r = 0; r + 1 < op.im.row_ptr().size(); ++r)
      for (std::size_t k = op.im.row_ptr()[r]; k < op.im.row_ptr()[r + 1]; ++k) {
        std::size_t rc, rn, cc, cn;
        split(r, rc, rn);
        split(op.im.col_idx()[k], cc, cn);
        const std::int64_t v = op.im.numerator(k);
        t.push_back({std::uint32_t((2 * rc) * N + rn), std::uint32_t((2 * cc + 1) * N + cn), -v});
        t.push_back({std::uint32_t((2 * rc + 1) * N + rn), std::uint32_t((2 * cc) * N + cn), v});
      }
    return SparseOp::from_int_triplets(big, big, std::move(t), s);
  }
  std::vector<Triplet<double>> t;
  op.re.for_each([&](std::uint32_t r, std::uint32_t c, double v) {
    const std::size_t rc = r / N, rn = r % N, cc = c / N, cn = c % N;
    t.push_back({std::uint32_t((2 * rc) * N + rn), std::uint32_t((2 * cc) * N + cn), v});
    t.push_back({std::uint32_t((2 * rc + 1) * N + rn), std::uint32_t((2 * cc + 1) * N + cn), v});
  });
  op.im.for_each([&](std::uint32_t r, std::uint32_t c, double v) {
    const std::size_t rc = r / N, rn = r % N, cc = c / N, cn = c % N;
    t.push_back({std::uint32_t((2 * rc) * N + rn), std::uint32_t((2 * cc + 1) * N + cn), -v});
    t.push_back({std::uint32_t((2 * rc + 1) * N + rn), std::uint32_t((2 * cc) * N + cn), v});
  });
  return SparseOp::from_triplets(big, big, std::move(t));
}

inline Vec realify_vec(const CxVec& x, std::size_t N) {
  const std::size_t m = x.size() / N;
  Vec out(2 * m * N);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t j = 0; j < N; ++j) {
      out[(2 * c) * N + j] = x[c * N + j].real();
      out[(2 * c + 1) * N + j] = x[c * N + j].imag();
    }
  return out;
}

inline CxVec complexify_vec(const Vec& x, std::size_t N) {
  const std::size_t m = x.size() / (2 * N);
  CxVec out(m * N);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t j = 0; j < N; ++j)
      out[c * N + j] = Cx(x[(2 * c) * N + j], x[(2 * c + 1) * N + j]);
  return out;
}

struct SpinorField {
  CxVec complex_form;  // 4 complex components per node
  Vec real_form;       // 8 real components per node
};

inline SpinorField spinor_from_complex(CxVec psi, std::size_t N) {
  SpinorField s;
  s.real_form = realify_vec(psi, N);
  s.complex_form = std::move(psi);
  return s;
}

inline SpinorField spinor_from_real(Vec psi, std::size_t N) {
  SpinorField s;
  s.complex_form = complexify_vec(psi, N);
  s.real_form = std::move(psi);
  return s;
}

// --- Wtilde and the chain to the extended operator ---------------------------

// Constant-coefficient k x k integer matrix as a block operator over stacks
// of N node values (component-major).
inline SparseOp constant_block_matrix(const std::vector<std::vector<std::int64_t>>& M,
                                      std::size_t N, const std::string& name) {
  const std::size_t k = M.size();
  std::vector<Triplet<std::int64_t>> t;
  for (std::size_t br = 0; br < k; ++br)
    for (std::size_t bc = 0; bc < k; ++bc)
      if (M[br][bc] != 0)
        for (std::uint32_t j = 0; j < N; ++j)
          t.push_back({std::uint32_t(br * N + j), std::uint32_t(bc * N + j), M[br][bc]});
  const Space s{name, k * N};
  return SparseOp::from_int_triplets(s, s, std::move(t), 1.0);
}

struct WtildeParts {
  SparseOp constant;     // K = [[0,-1,0,0],[1,0,0,0],[0,0,0,-1],[0,0,1,0]] blocks
  SparseOp first_order;  // rows (0,-D3,D2,-D1 / D3,0,D1,D2 / -D2,-D1,0,D3 / D1,-D2,-D3,0)
};

inline WtildeParts wtilde_parts(const GridSpec& g) {
  detail::require_periodic(g, "assemble_Wtilde");
  auto D = periodic_partials(g);
  const std::size_t N = PeriodicIndex(g).nodes();
  const std::string name = "w~(" + g.label() + ")";
  WtildeParts parts;
  parts.constant = constant_block_matrix(
      {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}}, N, name);
  const Space s{name, 4 * N};
  std::vector<Triplet<std::int64_t>> t;
  const double common = D[0].scale();
  const int sign[4][4] = {{0, -3, +2, -1}, {+3, 0, +1, +2}, {-2, -1, 0, +3}, {+1, -2, -3, 0}};
  for (int br = 0; br < 4; ++br)
    for (int bc = 0; bc < 4; ++bc)
      if (sign[br][bc] != 0) {
        const int d = std::abs(sign[br][bc]) - 1;
        append_shifted_exact(t, D[d], br * N, bc * N, common, sign[br][bc] > 0 ? 1 : -1);
      }
  parts.first_order = SparseOp::from_int_triplets(s, s, std::move(t), common);
  return parts;
}

// Wtilde as one operator (exact whenever the two scales reconcile, e.g. any
// mesh width with 2h or 1/(2h) integer; otherwise a general-real operator).
inline SparseOp assemble_Wtilde(const GridSpec& g) {
  const WtildeParts p = wtilde_parts(g);
  return p.constant + p.first_order;
}

struct UnitaryChain {
  CxOp U_q01;     // Q0 -> Q1
  SparseOp PL, PR;    // 4-block signed permutations of the final step
  SparseOp BigL;      // [[PR^T, 0],[0, PL]] acting on the 8 real components
};

namespace detail {

inline std::vector<std::vector<std::int64_t>> pl_matrix() {
  return {{0, 0, -1, 0}, {0, 0, 0, -1}, {-1, 0, 0, 0}, {0, 1, 0, 0}};
}
inline std::vector<std::vector<std::int64_t>> pr_matrix() {
  return {{0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
}
inline std::vector<std::vector<std::int64_t>> transpose4(
    const std::vector<std::vector<std::int64_t>>& m) {
  std::vector<std::vector<std::int64_t>> t(4, std::vector<std::int64_t>(4, 0));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) t[r][c] = m[c][r];
  return t;
}

}  // namespace detail

inline UnitaryChain dirac_to_extmax_unitary(const GridSpec& g) {
  detail::require_periodic(g, "dirac_to_extmax_unitary");
  const std::size_t N = PeriodicIndex(g).nodes();
  UnitaryChain ch;
  ch.U_q01 = assemble_U_q01(g);
  ch.PL = constant_block_matrix(detail::pl_matrix(), N, "PL(" + g.label() + ")");
  ch.PR = constant_block_matrix(detail::pr_matrix(), N, "PR(" + g.label() + ")");
  const auto prt = detail::transpose4(detail::pr_matrix());
  const auto pl = detail::pl_matrix();
  std::vector<std::vector<std::int64_t>> big(8, std::vector<std::int64_t>(8, 0));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      big[r][c] = prt[r][c];
      big[4 + r][4 + c] = pl[r][c];
    }
  ch.BigL = constant_block_matrix(big, N, "bigL(" + g.label() + ")");
  return ch;
}

// [[0, -X^T],[X, 0]] over two 4-component halves.
inline SparseOp hamiltonian_embed(const SparseOp& X, const std::string& name) {
  const std::size_t half = X.rows().dim;
  const Space big{name, 2 * half};
  const SparseOp Xt = X.transpose();
  if (X.exact()) {
    std::vector<Triplet<std::int64_t>> t;
    append_shifted_exact(t, Xt, 0, half, X.scale(), -1);
    append_shifted_exact(t, X, half, 0, X.scale(), +1);
    return SparseOp::from_int_triplets(big, big, std::move(t), X.scale());
  }
  std::vector<Triplet<double>> t;
  append_shifted_general(t, Xt, 0, half, -1.0);
  append_shifted_general(t, X, half, 0, 1.0);
  return SparseOp::from_triplets(big, big, std::move(t));
}

// Realified Q1 generator [[0, -W~^T],[W~, 0]] over the 8 real components;
// equals realify_op(assemble_Q(g, Q1)) entrywise.
inline SparseOp dirac_real_generator(const GridSpec& g) {
  return hamiltonian_embed(assemble_Wtilde(g), "dirac8(" + g.label() + ")");
}

// Constant skew matrix of the Hamiltonian slot-twin form: [[0, -Kp],[Kp, 0]] with
// Kp = PL * K * PR = [[0,0,1,0],[0,-1,0,0],[1,0,0,0],[0,0,0,1]].
inline SparseOp mcal1_op(const GridSpec& g) {
  detail::require_periodic(g, "mcal1_op");
  const std::size_t N = PeriodicIndex(g).nodes();
  std::vector<std::vector<std::int64_t>> kp = {
      {0, 0, 1, 0}, {0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}};
  const SparseOp Kp = constant_block_matrix(kp, N, "kp(" + g.label() + ")");
  return hamiltonian_embed(Kp, "m1(" + g.label() + ")");
}

// The displayed spatial target block matrix over (scalar, vector, vector,
// scalar) = 8 collocated components:
//   [[0, 0, div, 0], [0, 0, -curl, grad], [grad, curl, 0, 0], [0, div, 0, 0]]
// The grad/div slots couple the opposite scalar/vector copies compared to the
// extended operator, so relabeled copies are placed (periodic backend: the
// interior and full operators coincide entrywise).
inline BlockOp a_spatial_target(const VectorCalculus& vc) {
  const Layout ext = extended_layout(vc);
  BlockBuilder b(ext, ext);
  b.set(0, 2, vc.div.relabeled(vc.s0, vc.v2));
  b.set(1, 2, vc.curl.scaled(-1.0)).set(1, 3, vc.grad.relabeled(vc.v1, vc.s3));
  b.set(2, 0, vc.grad_i.relabeled(vc.v2, vc.s0)).set(2, 1, vc.curl_i);
  b.set(3, 1, vc.div_i.relabeled(vc.s3, vc.v1));
  return b.assemble_tagged(Tag::Dirac, vc.grid, true);
}

struct DiracEquivalenceReport {
  double residual_constant = 0.0;
  double residual_first_order = 0.0;
  double residual = 0.0;
  std::string first_mismatch;
};

// ‖ BigL [[0,-W~^T],[W~,0]] BigL^T  -  (M1 + A_spatial) ‖_max, evaluated
// separately on the constant and first-order parts (each pair shares a single
// exact integer scale, so both residuals are exactly zero when the chain
// identity holds).
inline DiracEquivalenceReport verify_dirac_equivalence(const GridSpec& g) {
  detail::require_periodic(g, "verify_dirac_equivalence");
  const VectorCalculus vc = vector_calculus(g);
  const WtildeParts wt = wtilde_parts(g);
  const UnitaryChain ch = dirac_to_extmax_unitary(g);
  const std::string name = "dirac8(" + g.label() + ")";

  const SparseOp big_const = hamiltonian_embed(wt.constant, name);
  const SparseOp big_diff = hamiltonian_embed(wt.first_order, name);
  const Space S8 = big_const.rows();
  const SparseOp L = ch.BigL.relabeled(S8, S8);
  const SparseOp lhs_const = L * big_const * L.transpose();
  const SparseOp lhs_diff = L * big_diff * L.transpose();

  const SparseOp m1 = mcal1_op(g).relabeled(S8, S8);
  const SparseOp a_sp = a_spatial_target(vc).flat.relabeled(S8, S8);

  DiracEquivalenceReport rep;
  rep.residual_constant = (lhs_const - m1).max_abs();
  rep.residual_first_order = (lhs_diff - a_sp).max_abs();
  rep.residual = std::max(rep.residual_constant, rep.residual_first_order);
  if (rep.residual != 0.0)
    rep.first_mismatch = rep.residual_constant != 0.0 ? "constant part" : "first-order part";
  return rep;
}

}  // namespace evomax
