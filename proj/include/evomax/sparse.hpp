#pragma once
// Sparse operators over entity spaces.
//
// Operators assembled from difference stencils carry an exact integer layer:
// value(k) = num[k] * scale.  Products and same-scale sums of such operators
// are computed in integer arithmetic, so compositions that cancel by
// telescoping (curl∘grad, div∘curl, signed-permutation conjugations) come out
// as literally empty matrices instead of 1e-17 noise.  Operators with general
// real entries (weights, step matrices) drop the integer layer and behave
// like ordinary CSR matrices.
//
// Storage is CSR with sorted, unique column indices per row and no explicit
// zeros after assembly.  Entry order is deterministic, so dumps and identity
// checks are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evomax {

using Vec = std::vector<double>;

struct Space {
  std::string name;
  std::size_t dim = 0;
};

inline bool operator==(const Space& a, const Space& b) {
  return a.dim == b.dim && a.name == b.name;
}

// Structured dimension error naming both spaces.
struct DimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string describe(const Space& s) {
  return s.name + "[" + std::to_string(s.dim) + "]";
}

inline void require_same_space(const Space& a, const Space& b, const char* what) {
  if (!(a == b))
    throw DimError(std::string(what) + ": incompatible spaces " + describe(a) +
                   " vs " + describe(b));
}

template <class T>
struct Triplet {
  std::uint32_t r = 0, c = 0;
  T v{};
};

class SparseOp {
 public:
  SparseOp() = default;

  static SparseOp zero(Space rows, Space cols) {
    SparseOp op;
    op.rows_ = std::move(rows);
    op.cols_ = std::move(cols);
    op.rowptr_.assign(op.rows_.dim + 1, 0);
    op.exact_ = true;
    op.scale_ = 1.0;
    return op;
  }

  static SparseOp identity(const Space& s) {
    std::vector<Triplet<std::int64_t>> t(s.dim);
    for (std::uint32_t i = 0; i < s.dim; ++i) t[i] = {i, i, 1};
    return from_int_triplets(s, s, t, 1.0);
  }

  // Diagonal operator with general real entries (inexact layer).
  static SparseOp diagonal(const Space& s, const Vec& d) {
    if (d.size() != s.dim) throw DimError("diagonal: " + describe(s) + " needs " + std::to_string(s.dim) + " values");
    std::vector<Triplet<double>> t;
    t.reserve(s.dim);
    for (std::uint32_t i = 0; i < s.dim; ++i)
      if (d[i] != 0.0) t.push_back({i, i, d[i]});
    return from_triplets(s, s, t);
  }

  static SparseOp from_int_triplets(Space rows, Space cols,
                                    std::vector<Triplet<std::int64_t>> t,
                                    double scale) {
    SparseOp op;
    op.rows_ = std::move(rows);
    op.cols_ = std::move(cols);
    op.exact_ = true;
    op.scale_ = scale;
    op.build(std::move(t), op.num_);
    op.refresh_values();
    return op;
  }

  static SparseOp from_triplets(Space rows, Space cols,
                                std::vector<Triplet<double>> t) {
    SparseOp op;
    op.rows_ = std::move(rows);
    op.cols_ = std::move(cols);
    op.exact_ = false;
    op.scale_ = 1.0;
    op.build(std::move(t), op.val_);
    return op;
  }

  const Space& rows() const { return rows_; }
  const Space& cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }
  bool exact() const { return exact_; }
  double scale() const { return scale_; }

  bool is_zero() const { return nnz() == 0; }

  // Same entries under different space labels (dimensions must match); used
  // where isomorphic copies of a space meet, e.g. grad appearing on both the
  // first and the second scalar slot of the extended layout.
  SparseOp relabeled(Space rows, Space cols) const {
    if (rows.dim != rows_.dim || cols.dim != cols_.dim)
      throw DimError("relabeled: " + describe(rows) + " x " + describe(cols) +
                     " incompatible with " + describe(rows_) + " x " + describe(cols_));
    SparseOp out = *this;
    out.rows_ = std::move(rows);
    out.cols_ = std::move(cols);
    return out;
  }

  SparseOp transpose() const {
    SparseOp out;
    out.rows_ = cols_;
    out.cols_ = rows_;
    out.exact_ = exact_;
    out.scale_ = scale_;
    const std::size_t n = nnz();
    std::vector<std::size_t> cnt(cols_.dim + 1, 0);
    for (std::size_t k = 0; k < n; ++k) ++cnt[col_[k] + 1];
    for (std::size_t c = 0; c < cols_.dim; ++c) cnt[c + 1] += cnt[c];
    out.rowptr_ = cnt;
    out.col_.resize(n);
    if (exact_) out.num_.resize(n); else out.val_.resize(n);
    std::vector<std::size_t> next = cnt;
    for (std::uint32_t r = 0; r < rows_.dim; ++r)
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k) {
        std::size_t pos = next[col_[k]]++;
        out.col_[pos] = r;
        if (exact_) out.num_[pos] = num_[k]; else out.val_[pos] = val_[k];
      }
    if (exact_) out.refresh_values();
    return out;
  }

  // Composition this * other (apply other first).
  SparseOp operator*(const SparseOp& b) const {
    require_same_space(cols_, b.rows_, "compose");
    if (exact_ && b.exact_) return mul_exact(b);
    return mul_general(b);
  }

  SparseOp operator+(const SparseOp& b) const { return add_impl(b, +1); }
  SparseOp operator-(const SparseOp& b) const { return add_impl(b, -1); }

  SparseOp scaled(double c) const {
    SparseOp out = *this;
    if (out.exact_) {
      // Integer factors fold into the numerators, keeping the layer exact.
      double r = std::nearbyint(c);
      if (r == c && std::abs(c) <= (1 << 20)) {
        auto k = static_cast<std::int64_t>(r);
        for (auto& v : out.num_) v *= k;
        out.prune_exact();
        out.refresh_values();
        return out;
      }
      out.scale_ *= c;
      out.refresh_values();
      return out;
    }
    for (auto& v : out.val_) v *= c;
    return out;
  }

  Vec apply(const Vec& x) const {
    if (x.size() != cols_.dim)
      throw DimError("apply: vector of size " + std::to_string(x.size()) +
                     " vs column space " + describe(cols_));
    Vec y(rows_.dim, 0.0);
    for (std::uint32_t r = 0; r < rows_.dim; ++r) {
      double acc = 0.0;
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k)
        acc += value(k) * x[col_[k]];
      y[r] = acc;
    }
    return y;
  }

  double value(std::size_t k) const {
    return exact_ ? static_cast<double>(num_[k]) * scale_ : val_[k];
  }

  double max_abs() const {
    if (exact_) {
      std::int64_t m = 0;
      for (auto v : num_) m = std::max(m, std::abs(v));
      return static_cast<double>(m) * std::abs(scale_);
    }
    double m = 0.0;
    for (auto v : val_) m = std::max(m, std::abs(v));
    return m;
  }

  double entry(std::uint32_t r, std::uint32_t c) const {
    for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k)
      if (col_[k] == c) return value(k);
    return 0.0;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint32_t r = 0; r < rows_.dim; ++r)
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k)
        f(r, col_[k], value(k));
  }

  // Coordinate-format text dump: "row col value", 17 significant digits.
  std::string dump_coordinate() const {
    std::string out;
    char buf[64];
    for_each([&](std::uint32_t r, std::uint32_t c, double v) {
      std::snprintf(buf, sizeof buf, "%u %u %.17g\n", r, c, v);
      out += buf;
    });
    return out;
  }

  const std::vector<std::size_t>& row_ptr() const { return rowptr_; }
  const std::vector<std::uint32_t>& col_idx() const { return col_; }
  // Integer numerator of entry k (exact layer only).
  std::int64_t numerator(std::size_t k) const { return num_[k]; }

 private:
  Space rows_, cols_;
  std::vector<std::size_t> rowptr_;
  std::vector<std::uint32_t> col_;
  std::vector<std::int64_t> num_;  // exact layer
  std::vector<double> val_;        // materialized values (always present)
  bool exact_ = true;
  double scale_ = 1.0;

  void refresh_values() {
    val_.resize(num_.size());
    for (std::size_t k = 0; k < num_.size(); ++k)
      val_[k] = static_cast<double>(num_[k]) * scale_;
  }

  template <class T>
  void build(std::vector<Triplet<T>> t, std::vector<T>& out_vals) {
    for (const auto& e : t)
      if (e.r >= rows_.dim || e.c >= cols_.dim)
        throw DimError("triplet (" + std::to_string(e.r) + "," + std::to_string(e.c) +
                       ") outside " + describe(rows_) + " x " + describe(cols_));
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    rowptr_.assign(rows_.dim + 1, 0);
    col_.clear();
    out_vals.clear();
    std::size_t i = 0;
    while (i < t.size()) {
      std::size_t j = i;
      T acc{};
      while (j < t.size() && t[j].r == t[i].r && t[j].c == t[i].c) acc += t[j++].v;
      if (acc != T{}) {
        col_.push_back(t[i].c);
        out_vals.push_back(acc);
        ++rowptr_[t[i].r + 1];
      }
      i = j;
    }
    for (std::size_t r = 0; r < rows_.dim; ++r) rowptr_[r + 1] += rowptr_[r];
    if (!exact_) return;
    // exact path fills num_; val_ refreshed by caller
  }

  void prune_exact() {
    std::size_t w = 0;
    std::vector<std::size_t> newptr(rows_.dim + 1, 0);
    for (std::uint32_t r = 0; r < rows_.dim; ++r) {
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k)
        if (num_[k] != 0) {
          col_[w] = col_[k];
          num_[w] = num_[k];
          ++w;
        }
      newptr[r + 1] = w;
    }
    col_.resize(w);
    num_.resize(w);
    rowptr_ = std::move(newptr);
  }

  SparseOp mul_exact(const SparseOp& b) const {
    SparseOp out;
    out.rows_ = rows_;
    out.cols_ = b.cols_;
    out.exact_ = true;
    out.scale_ = scale_ * b.scale_;
    out.rowptr_.assign(rows_.dim + 1, 0);
    std::vector<std::int64_t> acc(b.cols_.dim, 0);
    std::vector<std::uint32_t> touched;
    for (std::uint32_t r = 0; r < rows_.dim; ++r) {
      touched.clear();
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k) {
        const std::uint32_t mid = col_[k];
        const std::int64_t a = num_[k];
        for (std::size_t k2 = b.rowptr_[mid]; k2 < b.rowptr_[mid + 1]; ++k2) {
          const std::uint32_t c = b.col_[k2];
          if (acc[c] == 0) touched.push_back(c);
          acc[c] += a * b.num_[k2];
          if (acc[c] == 0) { /* stays in touched; filtered below */ }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (auto c : touched)
        if (acc[c] != 0) {
          out.col_.push_back(c);
          out.num_.push_back(acc[c]);
          ++out.rowptr_[r + 1];
          acc[c] = 0;
        } else {
          acc[c] = 0;
        }
    }
    for (std::size_t r = 0; r < rows_.dim; ++r) out.rowptr_[r + 1] += out.rowptr_[r];
    out.refresh_values();
    return out;
  }

  SparseOp mul_general(const SparseOp& b) const {
    SparseOp out;
    out.rows_ = rows_;
    out.cols_ = b.cols_;
    out.exact_ = false;
    out.scale_ = 1.0;
    out.rowptr_.assign(rows_.dim + 1, 0);
    std::vector<double> acc(b.cols_.dim, 0.0);
    std::vector<char> seen(b.cols_.dim, 0);
    std::vector<std::uint32_t> touched;
    for (std::uint32_t r = 0; r < rows_.dim; ++r) {
      touched.clear();
      for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k) {
        const std::uint32_t mid = col_[k];
        const double a = value(k);
        for (std::size_t k2 = b.rowptr_[mid]; k2 < b.rowptr_[mid + 1]; ++k2) {
          const std::uint32_t c = b.col_[k2];
          if (!seen[c]) { seen[c] = 1; touched.push_back(c); }
          acc[c] += a * b.value(k2);
        }
      }
      std::sort(touched.begin(), touched.end());
      for (auto c : touched) {
        if (acc[c] != 0.0) {
          out.col_.push_back(c);
          out.val_.push_back(acc[c]);
          ++out.rowptr_[r + 1];
        }
        acc[c] = 0.0;
        seen[c] = 0;
      }
    }
    for (std::size_t r = 0; r < rows_.dim; ++r) out.rowptr_[r + 1] += out.rowptr_[r];
    return out;
  }

  // Tries to bring two exact operators to a common scale with integer
  // multipliers (ratio of scales must be an exact small integer either way).
  static bool reconcile(double sa, double sb, std::int64_t& ka, std::int64_t& kb,
                        double& common) {
    if (sa == sb) { ka = kb = 1; common = sa; return true; }
    const double r1 = sa / sb;
    if (r1 == std::nearbyint(r1) && std::abs(r1) <= (1 << 20) && sb * r1 == sa) {
      ka = static_cast<std::int64_t>(r1); kb = 1; common = sb; return true;
    }
    const double r2 = sb / sa;
    if (r2 == std::nearbyint(r2) && std::abs(r2) <= (1 << 20) && sa * r2 == sb) {
      ka = 1; kb = static_cast<std::int64_t>(r2); common = sa; return true;
    }
    return false;
  }

  SparseOp add_impl(const SparseOp& b, int sign) const {
    require_same_space(rows_, b.rows_, "add(rows)");
    require_same_space(cols_, b.cols_, "add(cols)");
    if (b.nnz() == 0) return *this;
    if (nnz() == 0) return sign > 0 ? b : b.scaled(-1.0);
    std::int64_t ka = 0, kb = 0;
    double common = 1.0;
    const bool both_exact =
        exact_ && b.exact_ && reconcile(scale_, b.scale_, ka, kb, common);
    if (both_exact) {
      std::vector<Triplet<std::int64_t>> t;
      t.reserve(nnz() + b.nnz());
      for (std::uint32_t r = 0; r < rows_.dim; ++r)
        for (std::size_t k = rowptr_[r]; k < rowptr_[r + 1]; ++k)
          t.push_back({r, col_[k], num_[k] * ka});
      for (std::uint32_t r = 0; r < b.rows_.dim; ++r)
        for (std::size_t k = b.rowptr_[r]; k < b.rowptr_[r + 1]; ++k)
          t.push_back({r, b.col_[k], sign * b.num_[k] * kb});
      return from_int_triplets(rows_, cols_, std::move(t), common);
    }
    std::vector<Triplet<double>> t;
    t.reserve(nnz() + b.nnz());
    for_each([&](std::uint32_t r, std::uint32_t c, double v) { t.push_back({r, c, v}); });
    b.for_each([&](std::uint32_t r, std::uint32_t c, double v) { t.push_back({r, c, sign * v}); });
    return from_triplets(rows_, cols_, std::move(t));
  }
};

inline Vec operator*(const SparseOp& a, const Vec& x) { return a.apply(x); }

// Basic vector helpers (h³-weighted norms live with the grid code).
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline Vec& axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  return y;
}

inline Vec scaled(Vec v, double a) {
  for (auto& x : v) x *= a;
  return v;
}

inline Vec operator+(Vec a, const Vec& b) { axpy(a, 1.0, b); return a; }
inline Vec operator-(Vec a, const Vec& b) { axpy(a, -1.0, b); return a; }

}  // namespace evomax
