#pragma once
// Bridge to Eigen for factorizations, eigensolves, SVDs and the dense matrix
// exponential.  Everything structural stays in SparseOp; Eigen is used only
// behind these entry points.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

#include "sparse.hpp"

namespace evomax {

inline Eigen::SparseMatrix<double> to_eigen_sparse(const SparseOp& a) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  a.for_each([&](std::uint32_t r, std::uint32_t c, double v) {
    t.emplace_back(int(r), int(c), v);
  });
  Eigen::SparseMatrix<double> m(int(a.rows().dim), int(a.cols().dim));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

inline Eigen::MatrixXd to_eigen_dense(const SparseOp& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(long(a.rows().dim), long(a.cols().dim));
  a.for_each([&](std::uint32_t r, std::uint32_t c, double v) { m(r, c) = v; });
  return m;
}

inline Vec from_eigen(const Eigen::VectorXd& v) {
  return Vec(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd to_eigen(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), long(v.size()));
}

// Cached sparse direct factorization; reused across time steps.
class LuSolver {
 public:
  explicit LuSolver(const SparseOp& a, const std::string& context = "LuSolver")
      : n_(a.rows().dim), context_(context) {
    require_same_space(a.rows(), a.cols(), context.c_str());
    Eigen::SparseMatrix<double> m = to_eigen_sparse(a);
    lu_.compute(m);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error(context_ + ": singular step matrix (factorization failed)");
  }

  Vec solve(const Vec& rhs) const {
    if (rhs.size() != n_)
      throw DimError(context_ + ": rhs size " + std::to_string(rhs.size()) +
                     " vs matrix size " + std::to_string(n_));
    Eigen::VectorXd x = lu_.solve(to_eigen(rhs));
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error(context_ + ": sparse solve failed");
    return from_eigen(x);
  }

 private:
  std::size_t n_;
  std::string context_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

inline Vec sorted_singular_values(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  Vec s = from_eigen(svd.singularValues());
  std::sort(s.begin(), s.end());
  return s;
}

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m) { return m.exp(); }

}  // namespace evomax
