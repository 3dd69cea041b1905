#include "edagger/pendulum/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "edagger/common/errors.hpp"

namespace edagger::pendulum {

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
      R.cols() != B.cols())
    throw ShapeError("solve_care: inconsistent matrix shapes");

  const Eigen::MatrixXd G = B * R.ldlt().solve(B.transpose());
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(H);
  if (eig.info() != Eigen::Success) throw std::runtime_error("solve_care: eigen decomposition failed");

  Eigen::MatrixXcd stable(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (eig.eigenvalues()(i).real() < 0.0) {
      if (k == n) throw std::runtime_error("solve_care: Hamiltonian spectrum is not split");
      stable.col(k++) = eig.eigenvectors().col(i);
    }
  }
  if (k != n) throw std::runtime_error("solve_care: no stabilizing solution");

  const Eigen::MatrixXcd X1 = stable.topRows(n);
  const Eigen::MatrixXcd X2 = stable.bottomRows(n);
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1.transpose());
  if (!lu.isInvertible()) throw std::runtime_error("solve_care: no stabilizing solution");
  const Eigen::MatrixXcd P = lu.solve(X2.transpose()).transpose();
  const Eigen::MatrixXd Pr = P.real();
  Eigen::MatrixXd sym = 0.5 * (Pr + Pr.transpose());
  const Eigen::MatrixXd closed = A - G * sym;
  const Eigen::VectorXcd poles = closed.eigenvalues();
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    if (!(poles(i).real() < 0.0)) throw std::runtime_error("solve_care: no stabilizing solution");
  }
  return sym;
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd P = solve_care(A, B, Q, R);
  return R.ldlt().solve(B.transpose() * P);
}

}  // namespace edagger::pendulum
