#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stripbem {

using Vector = std::vector<double>;

/// Dense symmetric matrix. Entries are written in pairs so the storage stays
/// exactly symmetric.
class DenseSymMatrix {
 public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(std::size_t n) : a_(Eigen::MatrixXd::Zero(n, n)) {}
  static DenseSymMatrix from_dense(const Eigen::MatrixXd& m);  // symmetrises (m + m^T) / 2

  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }
  void set(std::size_t i, std::size_t j, double v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  void add(std::size_t i, std::size_t j, double v) {
    a_(i, j) += v;
    if (i != j) a_(j, i) += v;
  }
  const Eigen::MatrixXd& dense() const { return a_; }

  Vector multiply(std::span<const double> x) const;
  /// x^T A y.
  double bilinear(std::span<const double> x, std::span<const double> y) const;

 private:
  Eigen::MatrixXd a_;
};

/// Result of a dense Cholesky solve.
struct CholeskyResult {
  Vector x;
  double min_pivot = 0.0;  // smallest diagonal entry of the factor L
  double relative_residual = 0.0;
};

/// Solves A x = b for SPD A. Throws NumericalError on a non-positive pivot or if
/// the relative residual exceeds 1e-12 after iterative refinement.
CholeskyResult cholesky_solve_ex(const DenseSymMatrix& a, std::span<const double> b);
Vector cholesky_solve(const DenseSymMatrix& a, std::span<const double> b);

/// Sparse symmetric matrix assembled from triplets; duplicates are summed and
/// explicit zeros dropped on finalisation.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(std::size_t n) : n_(n) {}

  std::size_t size() const { return n_; }
  /// Adds v at (i, j) only; callers add both triangles of the matrix.
  void add(std::size_t i, std::size_t j, double v) { triplets_.emplace_back(static_cast<int>(i), static_cast<int>(j), v); }
  void finalize();
  bool finalized() const { return finalized_; }
  const Eigen::SparseMatrix<double>& matrix() const { return m_; }
  bool is_symmetric(double tol = 0.0) const;
  Vector multiply(std::span<const double> x) const;

 private:
  std::size_t n_ = 0;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseMatrix<double> m_;
  bool finalized_ = false;
};

/// Solves A x = b for sparse SPD A to relative residual 1e-10.
Vector sparse_spd_solve(const SparseSymMatrix& a, std::span<const double> b);

struct SaddleSolution {
  Vector primal;      // first block (flux)
  Vector multiplier;  // second block
};

/// Solves [[A, B^T], [B, 0]] (u, p) = (f, g). With `gauge_weights` non-empty the
/// multiplier is additionally constrained by sum_i w_i p_i = 0, removing a one
/// dimensional kernel of B^T. Blockwise relative residuals are at most 1e-10.
SaddleSolution saddle_solve(const SparseSymMatrix& a, const Eigen::SparseMatrix<double>& b, std::span<const double> f,
                            std::span<const double> g, std::span<const double> gauge_weights = {});

double norm2(std::span<const double> x);

}  // namespace stripbem
