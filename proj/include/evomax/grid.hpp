#pragma once
// Grid descriptions and entity indexing for the two spatial backends.
//
// periodic : collocated values on an n1 x n2 x n3 torus, mesh width h.
//            Every field (scalar or vector component) lives on the nodes.
// staggered: bounded box of n1 x n2 x n3 cells.  Scalars of the first kind
//            live on interior nodes, vector fields of the first kind on
//            interior edges, vector fields of the second kind on interior
//            faces, scalars of the second kind on cells.  "Interior" means
//            the entity does not lie in the boundary of the box; interior
//            operators act as zero-extension -> full-grid stencil ->
//            restriction, which encodes the homogeneous boundary condition.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "sparse.hpp"

namespace evomax {

enum class Backend { periodic, staggered };

inline std::string to_string(Backend b) {
  return b == Backend::periodic ? "periodic" : "staggered";
}

struct GridSpec {
  Backend backend = Backend::periodic;
  std::array<int, 3> n = {2, 2, 2};
  double h = 1.0;

  void validate() const {
    for (int d = 0; d < 3; ++d)
      if (n[d] < 2) throw std::runtime_error("grid: n" + std::to_string(d + 1) +
                                             " must be >= 2, got " + std::to_string(n[d]));
    if (!(h > 0)) throw std::runtime_error("grid: mesh width h must be positive");
  }

  std::string label() const {
    return to_string(backend) + " " + std::to_string(n[0]) + "x" +
           std::to_string(n[1]) + "x" + std::to_string(n[2]);
  }
};

// ---------------------------------------------------------------------------
// Periodic indexing: node (i,j,k) -> i + n1*(j + n2*k), i fastest.

struct PeriodicIndex {
  std::array<int, 3> n;
  explicit PeriodicIndex(const GridSpec& g) : n(g.n) {}
  std::size_t nodes() const {
    return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
  }
  std::uint32_t node(int i, int j, int k) const {
    auto w = [](int a, int m) { return ((a % m) + m) % m; };
    return std::uint32_t(w(i, n[0]) + n[0] * (w(j, n[1]) + std::size_t(n[1]) * w(k, n[2])));
  }
};

// ---------------------------------------------------------------------------
// Staggered indexing.  Full-grid entity counts for an n1 x n2 x n3 cell box:
//   nodes: (n1+1)(n2+1)(n3+1)
//   edges along d: one unit step in direction d, positions n_d x prod(n_e+1)
//   faces normal d: spans a cell cross-section orthogonal to d
//   cells: n1 n2 n3
// Interior = all touched mesh points strictly inside the box boundary.

struct StaggeredIndex {
  std::array<int, 3> n;

  explicit StaggeredIndex(const GridSpec& g) : n(g.n) {}

  // --- full-grid enumerations (component-major for edges/faces) ---
  std::size_t full_nodes() const {
    return std::size_t(n[0] + 1) * (n[1] + 1) * (n[2] + 1);
  }
  std::uint32_t full_node(int i, int j, int k) const {
    return std::uint32_t(i + (n[0] + 1) * (j + std::size_t(n[1] + 1) * k));
  }

  // Edge along direction d starting at node (i,j,k); i-range shrinks in d.
  std::size_t full_edges_dir(int d) const {
    std::size_t c = 1;
    for (int e = 0; e < 3; ++e) c *= (e == d) ? std::size_t(n[e]) : std::size_t(n[e] + 1);
    return c;
  }
  std::uint32_t full_edge(int d, int i, int j, int k) const {
    const int m0 = (d == 0) ? n[0] : n[0] + 1;
    const int m1 = (d == 1) ? n[1] : n[1] + 1;
    return std::uint32_t(i + m0 * (j + std::size_t(m1) * k));
  }

  // Face normal to direction d at plane i_d, covering cell cross-section.
  // Parameterize by (p, a, b): p = plane index in direction d (0..n_d),
  // a,b = cell indices in the two other directions (cyclic order d+1, d+2).
  std::size_t full_faces_dir(int d) const {
    std::size_t c = std::size_t(n[d] + 1);
    c *= std::size_t(n[(d + 1) % 3]) * std::size_t(n[(d + 2) % 3]);
    return c;
  }
  std::uint32_t full_face(int d, int p, int a, int b) const {
    const int mp = n[d] + 1;
    const int ma = n[(d + 1) % 3];
    return std::uint32_t(p + mp * (a + std::size_t(ma) * b));
  }

  std::size_t cells() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::uint32_t cell(int i, int j, int k) const {
    return std::uint32_t(i + n[0] * (j + std::size_t(n[1]) * k));
  }

  // --- interior predicates ---
  bool node_interior(int i, int j, int k) const {
    return i > 0 && i < n[0] && j > 0 && j < n[1] && k > 0 && k < n[2];
  }
  // Edge along d at (i,j,k): positions transverse to d must be interior planes.
  bool edge_interior(int d, int i, int j, int k) const {
    const int pos[3] = {i, j, k};
    for (int e = 0; e < 3; ++e) {
      if (e == d) continue;
      if (pos[e] <= 0 || pos[e] >= n[e]) return false;
    }
    return true;
  }
  // Face normal to d at plane p: interior iff the plane is not a boundary face
  // of the box (0 < p < n_d).
  bool face_interior(int d, int p) const { return p > 0 && p < n[d]; }

  std::size_t interior_nodes() const {
    return std::size_t(n[0] - 1) * (n[1] - 1) * (n[2] - 1);
  }
  std::size_t interior_edges_dir(int d) const {
    std::size_t c = std::size_t(n[d]);
    for (int e = 0; e < 3; ++e)
      if (e != d) c *= std::size_t(n[e] - 1);
    return c;
  }
  std::size_t interior_faces_dir(int d) const {
    return std::size_t(n[d] - 1) * std::size_t(n[(d + 1) % 3]) * std::size_t(n[(d + 2) % 3]);
  }
};

}  // namespace evomax
