#pragma once

#include "idp/core/errors.hpp"
#include "idp/mesh/sparsity.hpp"

#include <Eigen/Core>

#include <cmath>
#include <sstream>
#include <vector>

namespace idp {

struct CgOptions {
  double tol = 1e-10;  // on ||b - A x|| / ||b||
  int max_iter = -1;   // -1 selects 10 n
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
};

/// Preconditioned conjugate gradients for an SPD operator given as
/// apply(x) -> A x and precond(r) -> M^{-1} r.
template <class Apply, class Precond>
CgResult cg_solve(Apply&& apply, Precond&& precond, const Eigen::VectorXd& b, const Eigen::VectorXd& guess,
                  const CgOptions& options = {}) {
  const Eigen::Index n = b.size();
  const int max_iter = options.max_iter >= 0 ? options.max_iter : static_cast<int>(std::max<Eigen::Index>(10 * n, 1));
  CgResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Eigen::VectorXd::Zero(n);
    out.history.push_back(0.0);
    return out;
  }
  out.x = guess.size() == n ? guess : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b - apply(out.x);
  double rel = r.norm() / bnorm;
  out.history.push_back(rel);
  if (rel <= options.tol) {
    out.relative_residual = rel;
    return out;
  }
  Eigen::VectorXd z = precond(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      std::ostringstream os;
      os << "cg_solve: operator not positive definite (p.Ap = " << pAp << ") at iteration " << it;
      throw SolverError(os.str(), out.history);
    }
    const double alpha = rz / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    rel = r.norm() / bnorm;
    out.history.push_back(rel);
    out.iterations = it;
    if (rel <= options.tol) {
      // Guard against drift of the recursive residual.
      const double true_rel = (b - apply(out.x)).norm() / bnorm;
      if (true_rel <= options.tol) {
        out.relative_residual = true_rel;
        return out;
      }
      r = b - apply(out.x);
    }
    z = precond(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream os;
  os << "cg_solve: no convergence after " << max_iter << " iterations, relative residual " << rel;
  throw SolverError(os.str(), out.history);
}

/// Scalar matrix on a shared sparsity graph.
class CsrMatrix {
 public:
  CsrMatrix(const SparsityGraph& graph, std::vector<double> values) : graph_(&graph), values_(std::move(values)) {}

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(graph_->n_rows());
    for (int i = 0; i < graph_->n_rows(); ++i) {
      double s = 0.0;
      for (int k = graph_->row_begin(i); k < graph_->row_end(i); ++k) s += values_[k] * x[graph_->col(k)];
      y[i] = s;
    }
    return y;
  }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d(graph_->n_rows());
    for (int i = 0; i < graph_->n_rows(); ++i) d[i] = values_[graph_->diag(i)];
    return d;
  }

  const std::vector<double>& values() const { return values_; }
  const SparsityGraph& graph() const { return *graph_; }

 private:
  const SparsityGraph* graph_;
  std::vector<double> values_;
};

/// Jacobi-preconditioned CG on a CsrMatrix.
inline CgResult cg_solve(const CsrMatrix& A, const Eigen::VectorXd& b, const Eigen::VectorXd& guess,
                         const CgOptions& options = {}) {
  const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
  return cg_solve([&](const Eigen::VectorXd& x) { return A * x; },
                  [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return inv_diag.cwiseProduct(r); }, b, guess,
                  options);
}

}  // namespace idp
