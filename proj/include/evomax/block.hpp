#pragma once
// Block operators on component layouts: A_Dac, A_Nac, A_Max, A_ac, the
// extended 8-component operator, the 7-component GEM reduction, and the
// structural checks (skewness, annihilation, wave-operator factorization,
// Hamiltonian permutation form).
//
// A BlockOp stores the flattened sparse matrix plus the row/column layouts;
// zero blocks are implicit.  Assembly keeps the exact integer layer whenever
// all placed blocks share a reconcilable scale, so products of tagged
// operators cancel to literally empty matrices.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "complexes.hpp"
#include "grid.hpp"
#include "sparse.hpp"

namespace evomax {

struct Layout {
  std::vector<Space> parts;
  std::vector<std::size_t> offs;  // parts.size() + 1 entries
  Space flat;

  static Layout of(const std::string& name, std::vector<Space> p) {
    Layout l;
    l.parts = std::move(p);
    l.offs.assign(l.parts.size() + 1, 0);
    for (std::size_t i = 0; i < l.parts.size(); ++i)
      l.offs[i + 1] = l.offs[i] + l.parts[i].dim;
    l.flat = Space{name, l.offs.back()};
    return l;
  }

  std::size_t nparts() const { return parts.size(); }
  std::size_t dim() const { return flat.dim; }
  std::size_t offset(std::size_t i) const { return offs[i]; }

  Vec take(const Vec& full, std::size_t i) const {
    return Vec(full.begin() + offs[i], full.begin() + offs[i + 1]);
  }
  void put(Vec& full, std::size_t i, const Vec& piece) const {
    std::copy(piece.begin(), piece.end(), full.begin() + offs[i]);
  }
  Vec embed(std::size_t i, const Vec& piece) const {
    Vec full(dim(), 0.0);
    put(full, i, piece);
    return full;
  }
};

inline bool same_parts(const Layout& a, const Layout& b) {
  if (a.parts.size() != b.parts.size()) return false;
  for (std::size_t i = 0; i < a.parts.size(); ++i)
    if (!(a.parts[i] == b.parts[i])) return false;
  return true;
}

inline void require_same_layout(const Layout& a, const Layout& b, const char* what) {
  if (!same_parts(a, b))
    throw DimError(std::string(what) + ": layout mismatch " + describe(a.flat) +
                   " vs " + describe(b.flat));
}

enum class Tag { ADac, ANac, AMax, Aac, Extended, GEM, Dirac, Custom };

inline std::string to_string(Tag t) {
  switch (t) {
    case Tag::ADac: return "ADac";
    case Tag::ANac: return "ANac";
    case Tag::AMax: return "AMax";
    case Tag::Aac: return "Aac";
    case Tag::Extended: return "Extended";
    case Tag::GEM: return "GEM";
    case Tag::Dirac: return "Dirac";
    default: return "Custom";
  }
}

struct BlockOp {
  Tag tag = Tag::Custom;
  GridSpec grid;
  Layout rows, cols;
  SparseOp flat;

  // Extract block (bi, bj) as a standalone operator (mainly for tests/dumps).
  SparseOp block(std::size_t bi, std::size_t bj) const {
    const std::size_t r0 = rows.offset(bi), r1 = rows.offset(bi + 1);
    const std::size_t c0 = cols.offset(bj), c1 = cols.offset(bj + 1);
    std::vector<Triplet<double>> t;
    flat.for_each([&](std::uint32_t r, std::uint32_t c, double v) {
      if (r >= r0 && r < r1 && c >= c0 && c < c1)
        t.push_back({std::uint32_t(r - r0), std::uint32_t(c - c0), v});
    });
    return SparseOp::from_triplets(rows.parts[bi], cols.parts[bj], std::move(t));
  }
};

// Places sub-operators into a flat block matrix, keeping the exact layer when
// all scales are integer multiples of a common one.
class BlockBuilder {
 public:
  BlockBuilder(Layout rows, Layout cols) : rows_(std::move(rows)), cols_(std::move(cols)) {}

  BlockBuilder& set(std::size_t bi, std::size_t bj, SparseOp op) {
    require_same_space(op.rows(), rows_.parts.at(bi), "block row");
    require_same_space(op.cols(), cols_.parts.at(bj), "block col");
    items_.push_back({bi, bj, std::move(op)});
    return *this;
  }

  SparseOp assemble() const {
    bool all_exact = true;
    for (const auto& it : items_) all_exact = all_exact && it.op.exact();
    if (all_exact) {
      double common;
      if (find_common_scale(common)) {
        std::vector<Triplet<std::int64_t>> t;
        for (const auto& it : items_)
          append_shifted_exact(t, it.op, rows_.offset(it.bi), cols_.offset(it.bj), common);
        return SparseOp::from_int_triplets(rows_.flat, cols_.flat, std::move(t), common);
      }
    }
    std::vector<Triplet<double>> t;
    for (const auto& it : items_)
      append_shifted_general(t, it.op, rows_.offset(it.bi), cols_.offset(it.bj));
    return SparseOp::from_triplets(rows_.flat, cols_.flat, std::move(t));
  }

  BlockOp assemble_tagged(Tag tag, const GridSpec& grid, bool check_skew) const {
    BlockOp b;
    b.tag = tag;
    b.grid = grid;
    b.rows = rows_;
    b.cols = cols_;
    b.flat = assemble();
    if (check_skew) {
      const double skew = (b.flat + b.flat.transpose()).max_abs();
      if (skew != 0.0)
        throw std::runtime_error("assemble " + to_string(tag) +
                                 ": operator not exactly skew, max |A+A^T| = " +
                                 std::to_string(skew));
    }
    return b;
  }

 private:
  Layout rows_, cols_;
  struct Item {
    std::size_t bi, bj;
    SparseOp op;
  };
  std::vector<Item> items_;

  bool find_common_scale(double& common) const {
    // Empty blocks are scale-agnostic and are skipped.
    auto divides_all = [&](double cand) {
      for (const auto& it : items_) {
        if (it.op.nnz() == 0) continue;
        const double r = it.op.scale() / cand;
        if (!(r == std::nearbyint(r) && std::abs(r) <= (1 << 20) && cand * r == it.op.scale()))
          return false;
      }
      return true;
    };
    for (const auto& it : items_)
      if (it.op.nnz() != 0 && divides_all(it.op.scale())) {
        common = it.op.scale();
        return true;
      }
    common = 1.0;
    bool any = false;
    for (const auto& it : items_) any = any || it.op.nnz() != 0;
    return !any;  // all empty: integer assembly of nothing
  }
};

// --- layouts ----------------------------------------------------------------

// scalar(1st) + vector(1st) + vector(2nd) + scalar(2nd)
inline Layout extended_layout(const VectorCalculus& vc) {
  return Layout::of("ext(" + vc.grid.label() + ")", {vc.s0, vc.v1, vc.v2, vc.s3});
}

// scalar + vector(1st) + vector(2nd), the 7-component GEM arrangement
inline Layout gem_layout(const VectorCalculus& vc) {
  return Layout::of("gem(" + vc.grid.label() + ")", {vc.s0, vc.v1, vc.v2});
}

// --- tagged assembly --------------------------------------------------------

inline BlockOp assemble_block(Tag tag, const VectorCalculus& vc) {
  const Layout ext = extended_layout(vc);
  BlockBuilder b(ext, ext);
  switch (tag) {
    case Tag::ADac:
      b.set(0, 1, vc.div).set(1, 0, vc.grad_i);
      break;
    case Tag::ANac:
      b.set(2, 3, vc.grad).set(3, 2, vc.div_i);
      break;
    case Tag::AMax:
      b.set(1, 2, vc.curl.scaled(-1.0)).set(2, 1, vc.curl_i);
      break;
    case Tag::Aac:
      b.set(0, 1, vc.div).set(1, 0, vc.grad_i).set(2, 3, vc.grad).set(3, 2, vc.div_i);
      break;
    case Tag::Extended:
      b.set(0, 1, vc.div).set(1, 0, vc.grad_i);
      b.set(1, 2, vc.curl.scaled(-1.0)).set(2, 1, vc.curl_i);
      b.set(2, 3, vc.grad).set(3, 2, vc.div_i);
      break;
    default:
      throw std::runtime_error("assemble_block: unsupported tag " + to_string(tag));
  }
  return b.assemble_tagged(tag, vc.grid, /*check_skew=*/true);
}

// GEM spatial parts on the 7-component layout.
inline BlockOp assemble_gem_amax(const VectorCalculus& vc) {
  const Layout l = gem_layout(vc);
  BlockBuilder b(l, l);
  b.set(1, 2, vc.curl.scaled(-1.0)).set(2, 1, vc.curl_i);
  return b.assemble_tagged(Tag::AMax, vc.grid, true);
}

inline BlockOp assemble_gem_adac(const VectorCalculus& vc) {
  const Layout l = gem_layout(vc);
  BlockBuilder b(l, l);
  b.set(0, 1, vc.div).set(1, 0, vc.grad_i);
  return b.assemble_tagged(Tag::ADac, vc.grid, true);
}

// --- identities -------------------------------------------------------------

inline double verify_annihilation(const BlockOp& a, const BlockOp& b) {
  require_same_layout(a.cols, b.rows, "verify_annihilation");
  return (a.flat * b.flat).max_abs();
}

// ‖(A_Max + A_ac)^2 − blockdiag(Δ,...)‖_max on the periodic backend.
inline double wave_identity_residual(const GridSpec& g,
                                     bool drop_adac_negative_control = false) {
  if (g.backend != Backend::periodic)
    throw std::runtime_error(
        "wave_identity_residual: bounded backend rejected (componentwise "
        "Laplacian is only unambiguous on the periodic backend)");
  const VectorCalculus vc = vector_calculus(g);
  BlockOp op;
  if (drop_adac_negative_control) {
    const SparseOp amax = assemble_block(Tag::AMax, vc).flat;
    const SparseOp anac = assemble_block(Tag::ANac, vc).flat;
    op = assemble_block(Tag::Extended, vc);
    op.flat = amax + anac;
  } else {
    op = assemble_block(Tag::Extended, vc);
  }
  const SparseOp lap = periodic_laplacian(g);
  const Layout ext = extended_layout(vc);
  // blockdiag(Δ, Δ I3, Δ I3, Δ) entry-by-entry on the 8 collocated components.
  const std::size_t N = lap.rows().dim;
  std::vector<Triplet<std::int64_t>> t;
  for (int comp = 0; comp < 8; ++comp)
    append_shifted_exact(t, lap, comp * N, comp * N, lap.scale());
  SparseOp lap8 = SparseOp::from_int_triplets(ext.flat, ext.flat, std::move(t), lap.scale());
  return (op.flat * op.flat - lap8).max_abs();
}

// Blockwise permutation [[0,0,0,1],[0,1,0,0],[0,0,1,0],[1,0,0,0]] conjugation.
// Returns P a P^T on the permuted layout (slots 0 and 3 exchanged).
inline BlockOp hamiltonian_transform(const BlockOp& a) {
  require_same_layout(a.rows, a.cols, "hamiltonian_transform");
  if (a.rows.nparts() != 4)
    throw std::runtime_error("hamiltonian_transform: needs a 4-slot layout, got " +
                             std::to_string(a.rows.nparts()));
  const Layout& old = a.rows;
  const Layout perm = Layout::of("ham(" + old.flat.name + ")",
                                 {old.parts[3], old.parts[1], old.parts[2], old.parts[0]});
  BlockBuilder pb(perm, old);
  pb.set(0, 3, SparseOp::identity(old.parts[3]));
  pb.set(1, 1, SparseOp::identity(old.parts[1]));
  pb.set(2, 2, SparseOp::identity(old.parts[2]));
  pb.set(3, 0, SparseOp::identity(old.parts[0]));
  const SparseOp P = pb.assemble();
  BlockOp out;
  out.tag = Tag::Custom;
  out.grid = a.grid;
  out.rows = perm;
  out.cols = perm;
  out.flat = P * a.flat * P.transpose();
  return out;
}

// The printed expected form of hamiltonian_transform(A_Max + A_ac):
// off-diagonal [[0, −C^T],[C, 0]] with C = [[grad, curl°],[0, div]] acting
// (v2 ⊕ s0) -> (s3-slot ⊕ v1-slot sub-blocks of the permuted layout).
inline BlockOp hamiltonian_expected(const VectorCalculus& vc) {
  const Layout perm = Layout::of("ham(ext(" + vc.grid.label() + "))",
                                 {vc.s3, vc.v1, vc.v2, vc.s0});
  BlockBuilder b(perm, perm);
  b.set(0, 2, vc.div_i);
  b.set(1, 2, vc.curl.scaled(-1.0)).set(1, 3, vc.grad_i);
  b.set(2, 0, vc.grad).set(2, 1, vc.curl_i);
  b.set(3, 1, vc.div);
  return b.assemble_tagged(Tag::Custom, vc.grid, true);
}

}  // namespace evomax
