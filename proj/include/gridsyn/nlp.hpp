#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

namespace gridsyn {

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// min f(x)  s.t.  c_eq(x) = 0,  c_in(x) <= 0,  A_lin x <= b_lin,  lb <= x <= ub.
// Derivative callbacks are optional; central differences are used otherwise.
struct NlpProblem {
    int n = 0;
    ScalarFn objective;
    VectorFn gradient;
    VectorFn eq;
    MatrixFn eq_jacobian;
    VectorFn ineq;
    MatrixFn ineq_jacobian;
    // Optional positive semidefinite model of the objective Hessian (for
    // example Gauss-Newton); damped BFGS is used when absent.
    MatrixFn hessian;
    Eigen::MatrixXd A_lin;
    Eigen::VectorXd b_lin;
    Eigen::VectorXd lb, ub;
    Eigen::VectorXd x0;
};

enum class NlpStatus { Converged, IterLimit, Infeasible };
std::string to_string(NlpStatus s);

struct NlpIteration {
    int iteration = 0;
    double objective = 0;
    double merit = 0;
    double step_norm = 0;
    double kkt = 0;
    double violation = 0;
    double alpha = 0;
    bool elastic = false;
};

struct NlpSettings {
    double tol = 1e-6;
    int max_iter = 100;
    double h_rel = 1e-6;
    std::function<void(const NlpIteration&)> trace;
};

struct NlpSolution {
    Eigen::VectorXd x;
    double objective = 0;
    NlpStatus status = NlpStatus::IterLimit;
    double kkt_residual = 0;
    double violation = 0;
    int iterations = 0;
    Eigen::VectorXd lambda_eq, lambda_in;
};

// SQP with a damped BFGS Hessian, l1 merit line search and an elastic QP
// whenever the linearised constraints are inconsistent.
//
// The KKT residual is the max of the box-projected Lagrangian gradient
// (relative to max(1, |grad f|)), the constraint violation and the
// complementarity products.
NlpSolution solve(const NlpProblem& p, const NlpSettings& s = {});

// Central differences, one-sided at the box faces so probes stay inside.
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub, double h_rel);
Eigen::MatrixXd fd_jacobian(const VectorFn& c, const Eigen::VectorXd& x, const Eigen::VectorXd& cx,
                            const Eigen::VectorXd& lb, const Eigen::VectorXd& ub, double h_rel);

}  // namespace gridsyn
