#include <catch2/catch_amalgamated.hpp>

#include "evomax/block.hpp"
#include "evomax/linalg.hpp"
#include "evomax/rng.hpp"

using namespace evomax;

namespace {

GridSpec periodic(int n) { return GridSpec{Backend::periodic, {n, n, n}, 1.0 / n}; }
GridSpec staggered(int n) { return GridSpec{Backend::staggered, {n, n, n}, 1.0 / n}; }

}  // namespace

TEST_CASE("tagged block operators are exactly skew and sit in the right slots") {
  for (const GridSpec& g : {periodic(3), staggered(3)}) {
    const VectorCalculus vc = vector_calculus(g);
    for (Tag t : {Tag::ADac, Tag::ANac, Tag::AMax, Tag::Aac, Tag::Extended}) {
      const BlockOp a = assemble_block(t, vc);
      REQUIRE((a.flat + a.flat.transpose()).nnz() == 0);
    }
    const BlockOp amax = assemble_block(Tag::AMax, vc);
    REQUIRE((amax.block(1, 2) + vc.curl).nnz() == 0);
    REQUIRE((amax.block(2, 1) - vc.curl_i).nnz() == 0);
    REQUIRE(amax.block(0, 1).nnz() == 0);
    REQUIRE(amax.block(1, 0).nnz() == 0);
  }
}

TEST_CASE("Aac maps (phi, 0, 0, psi) to (0, grad_i phi, grad psi, 0)") {
  const GridSpec g = staggered(3);
  const VectorCalculus vc = vector_calculus(g);
  const BlockOp aac = assemble_block(Tag::Aac, vc);
  const Layout& lay = aac.rows;
  Rng rng(11);
  Vec u(lay.flat.dim, 0.0);
  Vec phi = rng.vector(vc.s0.dim, 1.0), psi = rng.vector(vc.s3.dim, 1.0);
  lay.put(u, 0, phi);
  lay.put(u, 3, psi);
  const Vec out = aac.flat.apply(u);
  REQUIRE(max_abs(lay.take(out, 0)) == 0.0);
  REQUIRE(max_abs(lay.take(out, 3)) == 0.0);
  REQUIRE(max_abs(lay.take(out, 1) - vc.grad_i.apply(phi)) == 0.0);
  REQUIRE(max_abs(lay.take(out, 2) - vc.grad.apply(psi)) == 0.0);
}

TEST_CASE("annihilation identities hold exactly on both backends") {
  for (int n : {2, 3, 4}) {
    for (const GridSpec& g : {periodic(n), staggered(n)}) {
      const VectorCalculus vc = vector_calculus(g);
      const BlockOp amax = assemble_block(Tag::AMax, vc);
      const BlockOp aac = assemble_block(Tag::Aac, vc);
      REQUIRE(verify_annihilation(amax, aac) == 0.0);
      REQUIRE(verify_annihilation(aac, amax) == 0.0);
    }
  }
  // (A_Max, A_Max) is generally nonzero: it contains -curl curl_i.
  const VectorCalculus vc = vector_calculus(periodic(3));
  const BlockOp amax = assemble_block(Tag::AMax, vc);
  REQUIRE(verify_annihilation(amax, amax) > 0.0);
}

TEST_CASE("wave identity: extended operator squares to the block Laplacian") {
  REQUIRE(wave_identity_residual(GridSpec{Backend::periodic, {4, 4, 4}, 0.25}) == 0.0);
  REQUIRE(wave_identity_residual(GridSpec{Backend::periodic, {6, 4, 4}, 1.0 / 6.0}) == 0.0);
  // negative control: dropping A_Dac breaks the factorization
  REQUIRE(wave_identity_residual(GridSpec{Backend::periodic, {4, 4, 4}, 0.25}, true) > 0.0);
  // bounded backend rejected
  REQUIRE_THROWS(wave_identity_residual(staggered(3)));
}

TEST_CASE("hamiltonian transform produces the printed off-diagonal form") {
  for (const GridSpec& g : {periodic(4), staggered(3)}) {
    const VectorCalculus vc = vector_calculus(g);
    const BlockOp aac_max = assemble_block(Tag::Extended, vc);
    const BlockOp ham = hamiltonian_transform(aac_max);
    const BlockOp expect = hamiltonian_expected(vc);
    REQUIRE((ham.flat - expect.flat.relabeled(ham.flat.rows(), ham.flat.cols())).nnz() == 0);
    // involutive: conjugating twice restores the operator
    const BlockOp twice = hamiltonian_transform(ham);
    REQUIRE((twice.flat - aac_max.flat.relabeled(twice.flat.rows(), twice.flat.cols())).nnz() == 0);
    // lower-left block of the displayed C: (2,0) = grad, (2,1) = curl_i, (3,1) = div
    REQUIRE((ham.block(2, 0) - vc.grad).nnz() == 0);
    REQUIRE((ham.block(2, 1) - vc.curl_i).nnz() == 0);
    REQUIRE((ham.block(3, 1) - vc.div).nnz() == 0);
    REQUIRE(ham.block(0, 0).nnz() == 0);
  }
}

TEST_CASE("hamiltonian transform preserves the singular spectrum") {
  for (const GridSpec& g : {periodic(3), staggered(2)}) {
    const BlockOp a = assemble_block(Tag::Extended, vector_calculus(g));
    const BlockOp h = hamiltonian_transform(a);
    const auto sa = sorted_singular_values(to_eigen_dense(a.flat));
    const auto sh = sorted_singular_values(to_eigen_dense(h.flat));
    REQUIRE(sa.size() == sh.size());
    for (std::size_t i = 0; i < sa.size(); ++i)
      REQUIRE(sa[i] == Catch::Approx(sh[i]).margin(1e-12));
  }
}

TEST_CASE("hamiltonian transform rejects non-4-slot layouts") {
  const VectorCalculus vc = vector_calculus(periodic(3));
  const BlockOp gem = assemble_gem_amax(vc);
  REQUIRE_THROWS(hamiltonian_transform(gem));
}
