#pragma once
// Discrete differential complexes on both backends.
//
// The six operators are named after their role in the block systems:
//   grad_i : scalar(1st kind) -> vector(1st kind)   "interior" gradient
//   div    : vector(1st kind) -> scalar(1st kind)   = -grad_i^T
//   curl_i : vector(1st kind) -> vector(2nd kind)
//   curl   : vector(2nd kind) -> vector(1st kind)   = curl_i^T
//   div_i  : vector(2nd kind) -> scalar(2nd kind)
//   grad   : scalar(2nd kind) -> vector(2nd kind)   = -div_i^T
//
// Composition identities curl_i*grad_i = 0, div_i*curl_i = 0 (and their
// adjoints) hold with exactly empty result matrices: all stencils are
// integer multiples of a common scale and products are evaluated in integer
// arithmetic.
//
// periodic : all four spaces are collocated node fields; the partial
//            derivative is the centered difference (f(x+h e_d)-f(x-h e_d))/2h.
//            On n_d = 2 the two neighbours coincide and D_d vanishes
//            identically (stored as an empty matrix, still a valid operator).
// staggered: zero-extension -> full-grid one-sided stencil -> restriction to
//            interior entities.  Boundary contributions drop out, which is
//            exactly the homogeneous boundary condition of the first-kind
//            operators; the second-kind operators are (minus) transposes.

#include <array>

#include "grid.hpp"
#include "sparse.hpp"

namespace evomax {

struct VectorCalculus {
  GridSpec grid;
  Space s0, v1, v2, s3;
  SparseOp grad_i, div, curl_i, curl, div_i, grad;
  // Normalized x-coordinate (in [0,1]) of each dof, used by spatial profiles.
  Vec x_s0, x_v1, x_v2, x_s3;
};

// --- periodic -------------------------------------------------------------

// Centered partial derivative along direction d on the torus.
inline SparseOp periodic_partial(const GridSpec& g, int d) {
  PeriodicIndex ix(g);
  const std::size_t N = ix.nodes();
  Space sc{"sc(" + g.label() + ")", N};
  std::vector<Triplet<std::int64_t>> t;
  t.reserve(2 * N);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::uint32_t row = ix.node(i, j, k);
        int p[3] = {i, j, k}, m[3] = {i, j, k};
        ++p[d];
        --m[d];
        t.push_back({row, ix.node(p[0], p[1], p[2]), +1});
        t.push_back({row, ix.node(m[0], m[1], m[2]), -1});
      }
  return SparseOp::from_int_triplets(sc, sc, std::move(t), 1.0 / (2.0 * g.h));
}

inline std::array<SparseOp, 3> periodic_partials(const GridSpec& g) {
  return {periodic_partial(g, 0), periodic_partial(g, 1), periodic_partial(g, 2)};
}

namespace detail {

// Stack three copies of a scalar space into a component-major vector space.
inline Space vector_space(const Space& sc, const std::string& tag) {
  return Space{tag + "(" + sc.name + ")", 3 * sc.dim};
}

}  // namespace detail

// Exact-layer shifted append into a triplet list: requires op.exact() and a
// caller-supplied common scale such that op.scale()/common is an exact small
// integer.  Used to assemble block matrices without leaving the integer layer.
inline void append_shifted_exact(std::vector<Triplet<std::int64_t>>& out,
                                 const SparseOp& op, std::size_t row_off,
                                 std::size_t col_off, double common,
                                 std::int64_t extra = 1) {
  if (op.nnz() == 0) return;
  const double ratio = op.scale() / common;
  if (!(op.exact() && ratio == std::nearbyint(ratio) && common * ratio == op.scale()))
    throw std::runtime_error("append_shifted_exact: scale " + std::to_string(op.scale()) +
                             " not an integer multiple of " + std::to_string(common));
  const auto k = static_cast<std::int64_t>(ratio) * extra;
  const auto& rp = op.row_ptr();
  const auto& ci = op.col_idx();
  for (std::uint32_t r = 0; r + 1 < rp.size(); ++r)
    for (std::size_t e = rp[r]; e < rp[r + 1]; ++e)
      out.push_back({std::uint32_t(r + row_off), std::uint32_t(ci[e] + col_off),
                     op.numerator(e) * k});
}

inline void append_shifted_general(std::vector<Triplet<double>>& out,
                                   const SparseOp& op, std::size_t row_off,
                                   std::size_t col_off, double factor = 1.0) {
  op.for_each([&](std::uint32_t r, std::uint32_t c, double v) {
    out.push_back({std::uint32_t(r + row_off), std::uint32_t(c + col_off), factor * v});
  });
}

inline VectorCalculus periodic_vector_calculus(const GridSpec& g) {
  auto D = periodic_partials(g);
  PeriodicIndex ix(g);
  const std::size_t N = ix.nodes();
  Space sc{"sc(" + g.label() + ")", N};
  Space v1 = detail::vector_space(sc, "v1");
  Space v2 = detail::vector_space(sc, "v2");
  const double common = 1.0 / (2.0 * g.h);

  auto grad_like = [&](const Space& to) {
    std::vector<Triplet<std::int64_t>> t;
    for (int d = 0; d < 3; ++d) append_shifted_exact(t, D[d], d * N, 0, common);
    return SparseOp::from_int_triplets(to, sc, std::move(t), common);
  };
  auto div_like = [&](const Space& from) {
    std::vector<Triplet<std::int64_t>> t;
    for (int d = 0; d < 3; ++d) append_shifted_exact(t, D[d], 0, d * N, common);
    return SparseOp::from_int_triplets(sc, from, std::move(t), common);
  };
  auto curl_like = [&](const Space& to, const Space& from) {
    std::vector<Triplet<std::int64_t>> t;
    // (curl u)_d = D_u u_w - D_w u_u with (d,u,w) cyclic.
    for (int d = 0; d < 3; ++d) {
      const int u = (d + 1) % 3, w = (d + 2) % 3;
      append_shifted_exact(t, D[u], d * N, w * N, common, +1);
      append_shifted_exact(t, D[w], d * N, u * N, common, -1);
    }
    return SparseOp::from_int_triplets(to, from, std::move(t), common);
  };

  VectorCalculus vc;
  vc.grid = g;
  vc.s0 = sc;
  vc.v1 = v1;
  vc.v2 = v2;
  vc.s3 = sc;
  vc.grad_i = grad_like(v1);
  vc.div = div_like(v1);
  vc.curl_i = curl_like(v2, v1);
  vc.curl = curl_like(v1, v2);
  vc.div_i = div_like(v2);
  vc.grad = grad_like(v2);
  vc.x_s0.resize(N);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) vc.x_s0[ix.node(i, j, k)] = double(i) / g.n[0];
  vc.x_s3 = vc.x_s0;
  vc.x_v1.clear();
  for (int c = 0; c < 3; ++c) vc.x_v1.insert(vc.x_v1.end(), vc.x_s0.begin(), vc.x_s0.end());
  vc.x_v2 = vc.x_v1;
  return vc;
}

// Scalar Laplacian sum_d D_d^2 (periodic).
inline SparseOp periodic_laplacian(const GridSpec& g) {
  auto D = periodic_partials(g);
  SparseOp L = D[0] * D[0];
  L = L + D[1] * D[1];
  L = L + D[2] * D[2];
  return L;
}

// --- staggered ------------------------------------------------------------

inline VectorCalculus staggered_vector_calculus(const GridSpec& g) {
  StaggeredIndex ix(g);

  // Interior index maps (full enumeration -> packed interior index).
  std::vector<std::int64_t> node_map(ix.full_nodes(), -1);
  std::size_t n_nodes = 0;
  for (int k = 0; k <= g.n[2]; ++k)
    for (int j = 0; j <= g.n[1]; ++j)
      for (int i = 0; i <= g.n[0]; ++i)
        if (ix.node_interior(i, j, k)) node_map[ix.full_node(i, j, k)] = std::int64_t(n_nodes++);

  std::array<std::vector<std::int64_t>, 3> edge_map;
  std::array<std::size_t, 3> n_edges{}, edge_off{};
  std::size_t edges_total = 0;
  for (int d = 0; d < 3; ++d) {
    edge_map[d].assign(ix.full_edges_dir(d), -1);
    edge_off[d] = edges_total;
    std::size_t cnt = 0;
    const int m0 = (d == 0) ? g.n[0] : g.n[0] + 1;
    const int m1 = (d == 1) ? g.n[1] : g.n[1] + 1;
    const int m2 = (d == 2) ? g.n[2] : g.n[2] + 1;
    for (int k = 0; k < m2; ++k)
      for (int j = 0; j < m1; ++j)
        for (int i = 0; i < m0; ++i)
          if (ix.edge_interior(d, i, j, k))
            edge_map[d][ix.full_edge(d, i, j, k)] = std::int64_t(cnt++);
    n_edges[d] = cnt;
    edges_total += cnt;
  }

  std::array<std::vector<std::int64_t>, 3> face_map;
  std::array<std::size_t, 3> n_faces{}, face_off{};
  std::size_t faces_total = 0;
  for (int d = 0; d < 3; ++d) {
    face_map[d].assign(ix.full_faces_dir(d), -1);
    face_off[d] = faces_total;
    std::size_t cnt = 0;
    const int u = (d + 1) % 3, w = (d + 2) % 3;
    for (int b = 0; b < g.n[w]; ++b)
      for (int a = 0; a < g.n[u]; ++a)
        for (int p = 0; p <= g.n[d]; ++p)
          if (ix.face_interior(d, p))
            face_map[d][ix.full_face(d, p, a, b)] = -2;  // mark, number below
    // Deterministic packed numbering in full-enumeration order.
    for (std::size_t f = 0; f < face_map[d].size(); ++f)
      if (face_map[d][f] == -2) face_map[d][f] = std::int64_t(cnt++);
    n_faces[d] = cnt;
    faces_total += cnt;
  }

  const std::string lab = g.label();
  Space s0{"s0(" + lab + ")", n_nodes};
  Space v1{"v1(" + lab + ")", edges_total};
  Space v2{"v2(" + lab + ")", faces_total};
  Space s3{"s3(" + lab + ")", ix.cells()};

  // grad_i : interior nodes -> interior edges, one-sided difference over the
  // edge; boundary endpoints drop (zero extension of the node field).
  std::vector<Triplet<std::int64_t>> tg;
  for (int d = 0; d < 3; ++d) {
    const int m0 = (d == 0) ? g.n[0] : g.n[0] + 1;
    const int m1 = (d == 1) ? g.n[1] : g.n[1] + 1;
    const int m2 = (d == 2) ? g.n[2] : g.n[2] + 1;
    for (int k = 0; k < m2; ++k)
      for (int j = 0; j < m1; ++j)
        for (int i = 0; i < m0; ++i) {
          const std::int64_t e = edge_map[d][ix.full_edge(d, i, j, k)];
          if (e < 0) continue;
          const std::uint32_t row = std::uint32_t(edge_off[d] + e);
          int s[3] = {i, j, k}, q[3] = {i, j, k};
          ++q[d];
          const std::int64_t ns = node_map[ix.full_node(s[0], s[1], s[2])];
          const std::int64_t ne = node_map[ix.full_node(q[0], q[1], q[2])];
          if (ne >= 0) tg.push_back({row, std::uint32_t(ne), +1});
          if (ns >= 0) tg.push_back({row, std::uint32_t(ns), -1});
        }
  }
  SparseOp grad_i = SparseOp::from_int_triplets(v1, s0, std::move(tg), 1.0 / g.h);

  // curl_i : interior edges -> interior faces; signed circulation around the
  // face boundary, edges on the box boundary drop.
  std::vector<Triplet<std::int64_t>> tc;
  for (int d = 0; d < 3; ++d) {
    const int u = (d + 1) % 3, w = (d + 2) % 3;
    for (int b = 0; b < g.n[w]; ++b)
      for (int a = 0; a < g.n[u]; ++a)
        for (int p = 0; p <= g.n[d]; ++p) {
          const std::int64_t f = face_map[d][ix.full_face(d, p, a, b)];
          if (f < 0) continue;
          const std::uint32_t row = std::uint32_t(face_off[d] + f);
          // (curl u)_d = d_u u_w - d_w u_u over the face cross-section.
          auto edge_at = [&](int dir, int cu, int cw) {
            int pos[3];
            pos[d] = p;
            pos[u] = cu;
            pos[w] = cw;
            return edge_map[dir][ix.full_edge(dir, pos[0], pos[1], pos[2])];
          };
          const std::int64_t ew_hi = edge_at(w, a + 1, b);
          const std::int64_t ew_lo = edge_at(w, a, b);
          const std::int64_t eu_hi = edge_at(u, a, b + 1);
          const std::int64_t eu_lo = edge_at(u, a, b);
          if (ew_hi >= 0) tc.push_back({row, std::uint32_t(edge_off[w] + ew_hi), +1});
          if (ew_lo >= 0) tc.push_back({row, std::uint32_t(edge_off[w] + ew_lo), -1});
          if (eu_hi >= 0) tc.push_back({row, std::uint32_t(edge_off[u] + eu_hi), -1});
          if (eu_lo >= 0) tc.push_back({row, std::uint32_t(edge_off[u] + eu_lo), +1});
        }
  }
  SparseOp curl_i = SparseOp::from_int_triplets(v2, v1, std::move(tc), 1.0 / g.h);

  // div_i : interior faces -> cells; flux balance, boundary faces drop.
  std::vector<Triplet<std::int64_t>> td;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const std::uint32_t row = ix.cell(i, j, k);
        const int c[3] = {i, j, k};
        for (int d = 0; d < 3; ++d) {
          const int u = (d + 1) % 3, w = (d + 2) % 3;
          const std::int64_t flo = face_map[d][ix.full_face(d, c[d], c[u], c[w])];
          const std::int64_t fhi = face_map[d][ix.full_face(d, c[d] + 1, c[u], c[w])];
          if (fhi >= 0) td.push_back({row, std::uint32_t(face_off[d] + fhi), +1});
          if (flo >= 0) td.push_back({row, std::uint32_t(face_off[d] + flo), -1});
        }
      }
  SparseOp div_i = SparseOp::from_int_triplets(s3, v2, std::move(td), 1.0 / g.h);

  VectorCalculus vc;
  vc.grid = g;
  vc.s0 = s0;
  vc.v1 = v1;
  vc.v2 = v2;
  vc.s3 = s3;
  vc.grad_i = grad_i;
  vc.div = grad_i.transpose().scaled(-1.0);
  vc.curl_i = curl_i;
  vc.curl = curl_i.transpose();
  vc.div_i = div_i;
  vc.grad = div_i.transpose().scaled(-1.0);

  // dof x-coordinates (entity midpoints, normalized by the box width).
  vc.x_s0.assign(n_nodes, 0.0);
  for (int k = 0; k <= g.n[2]; ++k)
    for (int j = 0; j <= g.n[1]; ++j)
      for (int i = 0; i <= g.n[0]; ++i) {
        const std::int64_t p = node_map[ix.full_node(i, j, k)];
        if (p >= 0) vc.x_s0[std::size_t(p)] = double(i) / g.n[0];
      }
  vc.x_v1.assign(edges_total, 0.0);
  for (int d = 0; d < 3; ++d) {
    const int m0 = (d == 0) ? g.n[0] : g.n[0] + 1;
    const int m1 = (d == 1) ? g.n[1] : g.n[1] + 1;
    const int m2 = (d == 2) ? g.n[2] : g.n[2] + 1;
    for (int k = 0; k < m2; ++k)
      for (int j = 0; j < m1; ++j)
        for (int i = 0; i < m0; ++i) {
          const std::int64_t e = edge_map[d][ix.full_edge(d, i, j, k)];
          if (e >= 0) vc.x_v1[edge_off[d] + std::size_t(e)] =
              (double(i) + (d == 0 ? 0.5 : 0.0)) / g.n[0];
        }
  }
  vc.x_v2.assign(faces_total, 0.0);
  for (int d = 0; d < 3; ++d) {
    const int u = (d + 1) % 3, w = (d + 2) % 3;
    for (int b = 0; b < g.n[w]; ++b)
      for (int a = 0; a < g.n[u]; ++a)
        for (int p = 0; p <= g.n[d]; ++p) {
          const std::int64_t f = face_map[d][ix.full_face(d, p, a, b)];
          if (f < 0) continue;
          double x;
          if (d == 0) x = double(p) / g.n[0];
          else if (u == 0) x = (double(a) + 0.5) / g.n[0];
          else x = (double(b) + 0.5) / g.n[0];
          vc.x_v2[face_off[d] + std::size_t(f)] = x;
        }
  }
  vc.x_s3.assign(ix.cells(), 0.0);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        vc.x_s3[ix.cell(i, j, k)] = (double(i) + 0.5) / g.n[0];
  return vc;
}

inline VectorCalculus vector_calculus(const GridSpec& g) {
  g.validate();
  return g.backend == Backend::periodic ? periodic_vector_calculus(g)
                                        : staggered_vector_calculus(g);
}

// h^3-weighted L2 norm used for all field residuals.
inline double grid_norm(const GridSpec& g, const Vec& x) {
  return std::sqrt(g.h * g.h * g.h * dot(x, x));
}

}  // namespace evomax
