#pragma once

#include <Eigen/Dense>

namespace edagger::pendulum {

/// Stabilizing solution P of A'P + PA - P B R^-1 B'P + Q = 0, from the stable
/// invariant subspace of the Hamiltonian matrix. Throws std::runtime_error if
/// (A, B) admits no stabilizing solution.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                           const Eigen::MatrixXd& R);

/// K = R^-1 B' P.
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R);

}  // namespace edagger::pendulum
