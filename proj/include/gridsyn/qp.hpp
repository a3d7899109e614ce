#pragma once

#include <Eigen/Core>

namespace gridsyn {

// min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lb <= x <= ub.
// Infinite bounds are ignored; variables with lb == ub are eliminated.
struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd A_in;
    Eigen::VectorXd b_in;
    Eigen::VectorXd lb, ub;
};

struct QpSettings {
    double tol = 1e-9;
    int max_iter = 80;
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd y_eq;     // multipliers of A_eq x = b_eq
    Eigen::VectorXd z_in;     // >= 0, multipliers of A_in x <= b_in
    Eigen::VectorXd z_box;    // signed: > 0 at an upper bound, < 0 at a lower bound
    bool converged = false;
    int iterations = 0;
    double primal_residual = 0;
    double dual_residual = 0;
};

// Dense primal-dual interior point with Mehrotra's predictor-corrector.
QpResult solve_qp(const QpProblem& qp, const QpSettings& s = {});

}  // namespace gridsyn
