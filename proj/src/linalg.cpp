#include "stripbem/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "stripbem/error.hpp"

namespace stripbem {
namespace {

Eigen::Map<const Eigen::VectorXd> view(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

}  // namespace

double norm2(std::span<const double> x) { return view(x).norm(); }

DenseSymMatrix DenseSymMatrix::from_dense(const Eigen::MatrixXd& m) {
  DenseSymMatrix out;
  out.a_ = 0.5 * (m + m.transpose());
  return out;
}

Vector DenseSymMatrix::multiply(std::span<const double> x) const { return to_vector(a_ * view(x)); }

double DenseSymMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  return view(x).dot(a_ * view(y));
}

CholeskyResult cholesky_solve_ex(const DenseSymMatrix& a, std::span<const double> b) {
  if (b.size() != a.size()) throw NumericalError("cholesky_solve: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(a.dense());
  if (llt.info() != Eigen::Success) throw NumericalError("cholesky_solve: matrix is not positive definite");
  const Eigen::MatrixXd& lmat = llt.matrixLLT();
  double min_pivot = lmat.size() ? lmat.diagonal().minCoeff() : 0.0;
  if (!(min_pivot > 0.0)) throw NumericalError("cholesky_solve: non-positive pivot");

  const auto rhs = view(b);
  Eigen::VectorXd x = llt.solve(rhs);
  const double bnorm = rhs.norm();
  double res = relative((a.dense() * x - rhs).norm(), bnorm);
  for (int it = 0; it < 3 && res > 1e-14; ++it) {
    x += llt.solve(rhs - a.dense() * x);
    res = relative((a.dense() * x - rhs).norm(), bnorm);
  }
  if (!(res <= 1e-12)) throw NumericalError("cholesky_solve: residual " + std::to_string(res) + " above 1e-12");
  return {to_vector(x), min_pivot, res};
}

Vector cholesky_solve(const DenseSymMatrix& a, std::span<const double> b) { return cholesky_solve_ex(a, b).x; }

void SparseSymMatrix::finalize() {
  m_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  m_.setFromTriplets(triplets_.begin(), triplets_.end());
  m_.prune(0.0);
  m_.makeCompressed();
  triplets_.clear();
  triplets_.shrink_to_fit();
  finalized_ = true;
}

bool SparseSymMatrix::is_symmetric(double tol) const {
  const Eigen::SparseMatrix<double> t = m_.transpose();
  const double scale = m_.norm();
  return (m_ - t).norm() <= tol * (scale > 0.0 ? scale : 1.0);
}

Vector SparseSymMatrix::multiply(std::span<const double> x) const { return to_vector(m_ * view(x)); }

Vector sparse_spd_solve(const SparseSymMatrix& a, std::span<const double> b) {
  if (!a.finalized()) throw NumericalError("sparse_spd_solve: matrix not finalized");
  if (b.size() != a.size()) throw NumericalError("sparse_spd_solve: dimension mismatch");
  if (a.size() == 0) return {};
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a.matrix());
  if (ldlt.info() != Eigen::Success) throw NumericalError("sparse_spd_solve: factorization failed");
  if (!(ldlt.vectorD().minCoeff() > 0.0)) throw NumericalError("sparse_spd_solve: matrix is not positive definite");
  const auto rhs = view(b);
  Eigen::VectorXd x = ldlt.solve(rhs);
  const double bnorm = rhs.norm();
  double res = relative((a.matrix() * x - rhs).norm(), bnorm);
  for (int it = 0; it < 5 && res > 1e-13; ++it) {
    x += ldlt.solve(rhs - a.matrix() * x);
    res = relative((a.matrix() * x - rhs).norm(), bnorm);
  }
  if (!(res <= 1e-10)) throw NumericalError("sparse_spd_solve: residual " + std::to_string(res) + " above 1e-10");
  return to_vector(x);
}

SaddleSolution saddle_solve(const SparseSymMatrix& a, const Eigen::SparseMatrix<double>& b, std::span<const double> f,
                            std::span<const double> g, std::span<const double> gauge_weights) {
  if (!a.finalized()) throw NumericalError("saddle_solve: matrix not finalized");
  const Eigen::Index n = static_cast<Eigen::Index>(a.size());
  const Eigen::Index m = b.rows();
  if (b.cols() != n || static_cast<Eigen::Index>(f.size()) != n || static_cast<Eigen::Index>(g.size()) != m)
    throw NumericalError("saddle_solve: dimension mismatch");
  const bool gauge = !gauge_weights.empty();
  if (gauge && static_cast<Eigen::Index>(gauge_weights.size()) != m)
    throw NumericalError("saddle_solve: gauge weights have the wrong size");
  const Eigen::Index total = n + m + (gauge ? 1 : 0);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.matrix().nonZeros() + 2 * b.nonZeros() + (gauge ? 2 * m : 0));
  for (Eigen::Index k = 0; k < a.matrix().outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a.matrix(), k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index k = 0; k < b.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, k); it; ++it) {
      trip.emplace_back(n + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), n + it.row(), it.value());
    }
  }
  if (gauge) {
    for (Eigen::Index i = 0; i < m; ++i) {
      trip.emplace_back(n + m, n + i, gauge_weights[i]);
      trip.emplace_back(n + i, n + m, gauge_weights[i]);
    }
  }
  Eigen::SparseMatrix<double> kkt(total, total);
  kkt.setFromTriplets(trip.begin(), trip.end());
  kkt.makeCompressed();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  rhs.head(n) = view(f);
  rhs.segment(n, m) = view(g);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(kkt);
  if (lu.info() != Eigen::Success) throw NumericalError("saddle_solve: singular system (rank deficiency)");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("saddle_solve: solve failed");

  // Residuals relative to |K| |y| + |rhs| blockwise.
  const Eigen::SparseMatrix<double> kabs = kkt.cwiseAbs();
  auto block_residuals = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd r = kkt * y - rhs;
    const Eigen::VectorXd scale = kabs * y.cwiseAbs() + rhs.cwiseAbs();
    return std::pair{relative(r.head(n).norm(), scale.head(n).norm()),
                     relative(r.segment(n, m).norm(), scale.segment(n, m).norm())};
  };
  auto [r1, r2] = block_residuals(x);
  for (int it = 0; it < 5 && (r1 > 1e-13 || r2 > 1e-13); ++it) {
    x += lu.solve(rhs - kkt * x);
    std::tie(r1, r2) = block_residuals(x);
  }
  if (!(r1 <= 1e-10) || !(r2 <= 1e-10))
    throw NumericalError("saddle_solve: residual above 1e-10 (rank deficiency beyond the gauge?)");
  SaddleSolution out;
  out.primal = to_vector(x.head(n));
  out.multiplier = to_vector(x.segment(n, m));
  return out;
}

}  // namespace stripbem
