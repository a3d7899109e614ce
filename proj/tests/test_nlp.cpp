#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsyn/nlp.hpp"
#include "gridsyn/qp.hpp"
#include "support/oracles.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace gridsyn;

namespace {

NlpProblem box_quadratic(double hi) {
    NlpProblem p;
    p.n = 1;
    p.objective = [](const Eigen::VectorXd& x) { return (x(0) - 3) * (x(0) - 3); };
    p.lb = Eigen::VectorXd::Constant(1, 0.0);
    p.ub = Eigen::VectorXd::Constant(1, hi);
    p.x0 = Eigen::VectorXd::Constant(1, 1.0);
    return p;
}

double rosen(const Eigen::Vector2d& x) { return (1 - x(0)) * (1 - x(0)) + 100 * std::pow(x(1) - x(0) * x(0), 2); }

NlpProblem constrained_rosenbrock() {
    NlpProblem p;
    p.n = 2;
    p.objective = [](const Eigen::VectorXd& x) { return rosen(x.head<2>()); };
    p.A_lin = Eigen::RowVector2d(1, 1);
    p.b_lin = Eigen::VectorXd::Constant(1, 1.0);
    p.lb = Eigen::Vector2d::Constant(-2);
    p.ub = Eigen::Vector2d::Constant(2);
    p.x0 = Eigen::Vector2d(-1, 1);
    return p;
}

}  // namespace

TEST_CASE("interior optimum") {
    const NlpSolution s = solve(box_quadratic(10));
    CHECK(s.status == NlpStatus::Converged);
    CHECK(s.x(0) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(s.kkt_residual <= 1e-6);
}

TEST_CASE("active bound") {
    const NlpSolution s = solve(box_quadratic(2));
    CHECK(s.status == NlpStatus::Converged);
    CHECK(s.x(0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.kkt_residual <= 1e-6);
}

TEST_CASE("constrained Rosenbrock against a grid search") {
    NlpSettings st;
    st.max_iter = 200;
    const NlpSolution s = solve(constrained_rosenbrock(), st);
    REQUIRE(s.status == NlpStatus::Converged);
    CHECK(s.kkt_residual <= 1e-6);
    const Eigen::Vector2d ref = oracle::grid_minimise(
        rosen, [](const Eigen::Vector2d& x) { return x.sum() <= 1.0 && x.cwiseAbs().maxCoeff() <= 2.0; }, -2, 2,
        400);
    CHECK((s.x - ref).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(s.x.sum() == doctest::Approx(1.0).epsilon(1e-8));

    SUBCASE("warm start from the solution") {
        NlpProblem p = constrained_rosenbrock();
        p.x0 = s.x;
        const NlpSolution again = solve(p, st);
        CHECK(again.status == NlpStatus::Converged);
        CHECK(again.iterations <= 2);
    }
    SUBCASE("bitwise repeatable") {
        const NlpSolution again = solve(constrained_rosenbrock(), st);
        CHECK(again.x == s.x);
        CHECK(again.iterations == s.iterations);
    }
}

TEST_CASE("nonlinear equality and inequality constraints") {
    // min x + y  s.t.  x^2 + y^2 = 2,  y >= -0.5 (as -y - 0.5 <= 0).
    NlpProblem p;
    p.n = 2;
    p.objective = [](const Eigen::VectorXd& x) { return x(0) + x(1); };
    p.eq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x.squaredNorm() - 2); };
    p.ineq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, -x(1) - 0.5); };
    p.lb = Eigen::Vector2d::Constant(-5);
    p.ub = Eigen::Vector2d::Constant(5);
    // (1, 1) is itself a KKT point (the maximum), so start elsewhere.
    p.x0 = Eigen::Vector2d(-1, 1);
    const NlpSolution s = solve(p);
    REQUIRE(s.status == NlpStatus::Converged);
    // On the circle with y at its floor: x = -sqrt(2 - 0.25).
    CHECK(s.x(1) == doctest::Approx(-0.5).epsilon(1e-7));
    CHECK(s.x(0) == doctest::Approx(-std::sqrt(1.75)).epsilon(1e-7));
    CHECK(s.kkt_residual <= 1e-6);
    CHECK(s.violation <= NlpSettings{}.tol);
}

TEST_CASE("Gauss-Newton model of a least-squares objective") {
    // r(x) = (x0 - 1, 10 (x1 - x0^2)), f = |r|^2.
    auto res = [](const Eigen::VectorXd& x) { return Eigen::Vector2d(x(0) - 1, 10 * (x(1) - x(0) * x(0))); };
    NlpProblem p;
    p.n = 2;
    p.objective = [&](const Eigen::VectorXd& x) { return res(x).squaredNorm(); };
    p.hessian = [](const Eigen::VectorXd& x) {
        Eigen::Matrix2d j;
        j << 1, 0, -20 * x(0), 10;
        return Eigen::MatrixXd(2 * j.transpose() * j);
    };
    p.lb = Eigen::Vector2d::Constant(-3);
    p.ub = Eigen::Vector2d::Constant(3);
    p.x0 = Eigen::Vector2d(-1.2, 1);
    const NlpSolution s = solve(p);
    CHECK(s.status == NlpStatus::Converged);
    CHECK((s.x - Eigen::Vector2d(1, 1)).norm() <= 1e-6);
}

TEST_CASE("inconsistent constraints are reported") {
    NlpProblem p;
    p.n = 1;
    p.objective = [](const Eigen::VectorXd& x) { return x(0) * x(0); };
    p.ineq = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, 1.0 - x(0)); };   // x >= 1
    p.lb = Eigen::VectorXd::Constant(1, -1.0);
    p.ub = Eigen::VectorXd::Constant(1, 0.5);
    p.x0 = Eigen::VectorXd::Constant(1, 0.0);
    const NlpSolution s = solve(p);
    CHECK(s.status == NlpStatus::Infeasible);
    CHECK(s.violation > 0.4);
}

TEST_CASE("iteration limit") {
    NlpSettings st;
    st.max_iter = 1;
    const NlpSolution s = solve(constrained_rosenbrock(), st);
    CHECK(s.status == NlpStatus::IterLimit);
    CHECK(s.iterations == 1);
}

TEST_CASE("quadratic program") {
    // min 1/2 |x|^2 - (1, 1) x  s.t.  x0 + x1 = 1,  x0 <= 0.25,  x >= 0.
    QpProblem q;
    q.H = Eigen::Matrix2d::Identity();
    q.g = Eigen::Vector2d(-1, -1);
    q.A_eq = Eigen::RowVector2d(1, 1);
    q.b_eq = Eigen::VectorXd::Constant(1, 1.0);
    q.A_in = Eigen::RowVector2d(1, 0);
    q.b_in = Eigen::VectorXd::Constant(1, 0.25);
    q.lb = Eigen::Vector2d::Zero();
    q.ub = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    const QpResult r = solve_qp(q);
    REQUIRE(r.converged);
    CHECK(r.x(0) == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(r.x(1) == doctest::Approx(0.75).epsilon(1e-7));
    CHECK(r.z_in(0) >= 0);
    // Stationarity: H x + g + A_eq' y + A_in' z + z_box = 0.
    const Eigen::Vector2d stat = q.H * r.x + q.g + q.A_eq.transpose() * r.y_eq + q.A_in.transpose() * r.z_in + r.z_box;
    CHECK(stat.norm() <= 1e-7);
}

TEST_CASE("finite-difference helpers stay inside the box") {
    const Eigen::VectorXd lb = Eigen::VectorXd::Zero(1), ub = Eigen::VectorXd::Ones(1);
    ScalarFn f = [](const Eigen::VectorXd& x) {
        REQUIRE(x(0) >= 0.0);
        return std::sqrt(x(0)) + x(0);
    };
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    const Eigen::VectorXd g = fd_gradient(f, x, f(x), lb, ub, 1e-6);
    CHECK(std::isfinite(g(0)));
    const Eigen::VectorXd x1 = Eigen::VectorXd::Constant(1, 0.25);
    CHECK(fd_gradient(f, x1, f(x1), lb, ub, 1e-6)(0) == doctest::Approx(2.0).epsilon(1e-6));
}
