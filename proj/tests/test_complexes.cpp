#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evomax/complexes.hpp"

using namespace evomax;

namespace {

GridSpec periodic(int n1, int n2, int n3) {
  return GridSpec{Backend::periodic, {n1, n2, n3}, 1.0 / n1};
}
GridSpec staggered(int n1, int n2, int n3) {
  return GridSpec{Backend::staggered, {n1, n2, n3}, 1.0 / n1};
}

}  // namespace

TEST_CASE("periodic partial reproduces the centered-difference sine mode") {
  // f(i,j,k) = sin(2 pi i / 4) has the exact value pattern (0, 1, 0, -1);
  // D_0 f = sin(2 pi / 4) / h * cos(2 pi i / 4) = 4 * (1, 0, -1, 0) on h = 1/4.
  const GridSpec g = periodic(4, 4, 4);
  auto D = periodic_partials(g);
  PeriodicIndex ix(g);
  const double s[4] = {0.0, 1.0, 0.0, -1.0};
  const double c[4] = {1.0, 0.0, -1.0, 0.0};
  Vec f(ix.nodes());
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) f[ix.node(i, j, k)] = s[i];
  const Vec df = D[0].apply(f);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) REQUIRE(df[ix.node(i, j, k)] == 4.0 * c[i]);
  // Transverse directions see a constant: exact zero.
  REQUIRE(max_abs(D[1].apply(f)) == 0.0);
  REQUIRE(max_abs(D[2].apply(f)) == 0.0);
}

TEST_CASE("periodic partials are exactly skew and commute") {
  for (int n : {3, 4, 5}) {
    const GridSpec g = periodic(n, n, n);
    auto D = periodic_partials(g);
    for (int d = 0; d < 3; ++d) {
      REQUIRE((D[d] + D[d].transpose()).nnz() == 0);
    }
    REQUIRE((D[0] * D[1] - D[1] * D[0]).nnz() == 0);
    REQUIRE((D[1] * D[2] - D[2] * D[1]).nnz() == 0);
  }
}

TEST_CASE("periodic partial on two cells vanishes identically") {
  const GridSpec g = periodic(2, 2, 2);
  auto D = periodic_partials(g);
  for (int d = 0; d < 3; ++d) REQUIRE(D[d].nnz() == 0);
}

TEST_CASE("composition identities are exactly empty on both backends") {
  auto check = [](const GridSpec& g) {
    const VectorCalculus vc = vector_calculus(g);
    REQUIRE((vc.curl_i * vc.grad_i).nnz() == 0);
    REQUIRE((vc.div_i * vc.curl_i).nnz() == 0);
    REQUIRE((vc.curl * vc.grad).nnz() == 0);
    REQUIRE((vc.div * vc.curl).nnz() == 0);
    REQUIRE((vc.curl_i * vc.grad_i).max_abs() == 0.0);
  };
  for (int n : {2, 3, 4}) {
    check(periodic(n, n, n));
    check(staggered(n, n, n));
  }
  check(staggered(2, 3, 4));
  check(periodic(3, 4, 5));
}

TEST_CASE("adjoint pairings hold exactly on both backends") {
  for (const GridSpec& g : {periodic(4, 4, 4), staggered(3, 3, 3), staggered(2, 3, 4)}) {
    const VectorCalculus vc = vector_calculus(g);
    REQUIRE((vc.div + vc.grad_i.transpose()).nnz() == 0);
    REQUIRE((vc.curl - vc.curl_i.transpose()).nnz() == 0);
    REQUIRE((vc.grad + vc.div_i.transpose()).nnz() == 0);
  }
}

TEST_CASE("staggered interior entity counts") {
  const GridSpec g = staggered(2, 3, 4);
  const VectorCalculus vc = vector_calculus(g);
  // nodes: (n1-1)(n2-1)(n3-1); edges dir d: n_d * prod_{t != d}(n_t - 1);
  // faces dir d: (n_d - 1) * prod_{t != d} n_t; cells: n1 n2 n3.
  REQUIRE(vc.s0.dim == 1u * 2u * 3u);
  REQUIRE(vc.v1.dim == std::size_t(2 * 2 * 3 + 3 * 1 * 3 + 4 * 1 * 2));
  REQUIRE(vc.v2.dim == std::size_t(1 * 3 * 4 + 2 * 2 * 4 + 3 * 2 * 3));
  REQUIRE(vc.s3.dim == 24u);
}

TEST_CASE("staggered gradient stencil on the minimal grid") {
  // On 2x2x2 there is exactly one interior node; each direction contributes
  // two interior edges, and grad_i of the node indicator is +-1/h on them.
  const GridSpec g = staggered(2, 2, 2);
  const VectorCalculus vc = vector_calculus(g);
  REQUIRE(vc.s0.dim == 1);
  REQUIRE(vc.v1.dim == 6);
  Vec e0 = {1.0};
  const Vec ge = vc.grad_i.apply(e0);
  // Each direction: edge below the node gets +1/h, edge above gets -1/h.
  int plus = 0, minus = 0;
  for (double v : ge) {
    if (v == 2.0) ++plus;        // 1/h = 2
    else if (v == -2.0) ++minus;
    else REQUIRE(v == 0.0);
  }
  REQUIRE(plus == 3);
  REQUIRE(minus == 3);
}

TEST_CASE("staggered divergence counts signed fluxes") {
  const GridSpec g = staggered(2, 2, 2);
  const VectorCalculus vc = vector_calculus(g);
  // 2x2x2: 4 interior faces per direction, 8 cells.
  REQUIRE(vc.v2.dim == 12);
  REQUIRE(vc.s3.dim == 8);
  // div_i of the all-ones flux: each cell sees one interior face per
  // direction, entering (+1/h) on the low side of the mid-plane and leaving
  // (-1/h) on the high side.
  Vec ones(vc.v2.dim, 1.0);
  const Vec dv = vc.div_i.apply(ones);
  StaggeredIndex ix(g);
  REQUIRE(dv[ix.cell(0, 0, 0)] == 6.0);
  REQUIRE(dv[ix.cell(1, 1, 1)] == -6.0);
  REQUIRE(dv[ix.cell(1, 0, 0)] == 2.0);
}

TEST_CASE("periodic laplacian acts as the exact symbol on a sine mode") {
  const GridSpec g = periodic(4, 4, 4);
  const SparseOp lap = periodic_laplacian(g);
  PeriodicIndex ix(g);
  const double s[4] = {0.0, 1.0, 0.0, -1.0};
  Vec f(ix.nodes());
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) f[ix.node(i, j, k)] = s[i];
  const Vec lf = lap.apply(f);
  // Symbol: -(sin(2 pi / 4) / h)^2 = -16 at h = 1/4.
  for (std::size_t p = 0; p < f.size(); ++p) REQUIRE(lf[p] == -16.0 * f[p]);
}

TEST_CASE("grid validation rejects bad parameters") {
  GridSpec g = periodic(4, 4, 4);
  g.n[1] = 1;
  REQUIRE_THROWS(g.validate());
  g = periodic(4, 4, 4);
  g.h = 0.0;
  REQUIRE_THROWS(g.validate());
}

TEST_CASE("normalized x coordinates cover the expected pattern") {
  const GridSpec gp = periodic(4, 4, 4);
  const VectorCalculus vp = vector_calculus(gp);
  PeriodicIndex ix(gp);
  REQUIRE(vp.x_s0[ix.node(3, 0, 0)] == 0.75);
  REQUIRE(vp.x_v1.size() == vp.v1.dim);

  const GridSpec gs = staggered(2, 2, 2);
  const VectorCalculus vs = vector_calculus(gs);
  REQUIRE(vs.x_s0[0] == 0.5);  // the single interior node sits at the center
  REQUIRE(vs.x_s3[0] == 0.25);
}
