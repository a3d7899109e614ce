#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridsyn/errors.hpp"
#include "gridsyn/netgraph.hpp"
#include "gridsyn/plant.hpp"

#include <sstream>

using namespace gridsyn;

namespace {

const PlantParams& params() {
    static const PlantParams p;
    return p;
}

const OperatingPoint& reference() {
    static const OperatingPoint op = reference_equilibrium(params());
    return op;
}

}  // namespace

TEST_CASE("finite differences reproduce a linear system") {
    Eigen::MatrixXd M(3, 3), N(3, 2), C(1, 3), D(1, 2);
    M << -1, 0.5, 0, 0.2, -3, 1, 0, 0, -0.1;
    N << 1, 0, 0, 2, -1, 0.5;
    C << 1, 1, 0;
    D << 0, 3;
    VectorField f = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) -> Eigen::VectorXd { return M * x + N * g; };
    VectorField h = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) -> Eigen::VectorXd { return C * x + D * g; };
    const Eigen::Vector3d x(0.3, -2, 5);
    const Eigen::Vector2d g(1, 7);
    const JacobianSet j = jacobians(f, h, x, g);
    CHECK((j.A - M).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((j.B - N).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((j.C - C).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((j.D - D).cwiseAbs().maxCoeff() <= 1e-8);

    VectorField bad = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
        return x.array().log();
    };
    CHECK_THROWS_AS(jacobians(bad, h, Eigen::Vector3d(0, 1, 1), g), NonFiniteDerivative);
}

TEST_CASE("plant jacobians at the reference equilibrium") {
    const JacobianSet j = plant_jacobians(params(), reference());
    CHECK(j.A.rows() == kNx);
    CHECK(j.B.cols() == kNu + kNw);
    CHECK(j.point_residual <= 1e-6);
    // Chilled flow of the absorption chiller reaches the room temperature.
    CHECK(j.B(sx::t_br, su::G_ab) != 0.0);

    SUBCASE("halving the step moves nonneutral entries by at most h^2") {
        const double h = 1e-3;
        const JacobianSet a = plant_jacobians(params(), reference(), h);
        const JacobianSet b = plant_jacobians(params(), reference(), h / 2);
        Eigen::MatrixXd ja(kNx, kNx + kNu + kNw), jb(kNx, kNx + kNu + kNw);
        ja << a.A, a.B;
        jb << b.A, b.B;
        for (int i = 0; i < kNx; ++i) {
            const double row = std::max(1.0, jb.row(i).cwiseAbs().maxCoeff());
            for (int k = 0; k < jb.cols(); ++k)
                if (std::abs(jb(i, k)) > 1e-8 * row) CHECK(std::abs(ja(i, k) - jb(i, k)) <= h * h * std::abs(jb(i, k)));
        }
    }
}

TEST_CASE("central differences converge at second order on a smooth field") {
    VectorField f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& g) -> Eigen::VectorXd {
        return Eigen::Vector2d(std::sin(x(0)) * x(1), std::exp(0.5 * x(1)) * g(0));
    };
    VectorField h = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, x(0) * x(0) * x(0));
    };
    const Eigen::Vector2d x(0.7, 1.3);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 2.0);
    Eigen::Matrix2d exact;
    exact << std::cos(0.7) * 1.3, std::sin(0.7), 0, 0.5 * std::exp(0.65) * 2.0;
    double prev = 0;
    for (double step : {1e-2, 5e-3, 2.5e-3}) {
        const double err = (jacobians(f, h, x, g, step).A - exact).cwiseAbs().maxCoeff();
        if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
        prev = err;
    }
}

TEST_CASE("augment places the blocks") {
    JacobianSet z;
    z.A = Eigen::MatrixXd::Zero(2, 2);
    z.B = Eigen::MatrixXd::Zero(2, 3);
    z.C = Eigen::MatrixXd::Zero(1, 2);
    z.D = Eigen::MatrixXd::Zero(1, 3);
    const Eigen::MatrixXd m0 = augment(z);
    CHECK(m0.rows() == 6);
    CHECK(m0.isZero(0));

    JacobianSet s;
    s.A = Eigen::MatrixXd::Constant(1, 1, 2.0);
    s.B = Eigen::MatrixXd::Constant(1, 1, 3.0);
    s.C = Eigen::MatrixXd::Constant(1, 1, 5.0);
    s.D = Eigen::MatrixXd::Constant(1, 1, 7.0);
    Eigen::Matrix3d want;
    want << 2, 3, 0, 0, 0, 0, 5, 7, 0;
    CHECK(augment(s) == want);
}

TEST_CASE("thresholded adjacency") {
    CHECK(adjacency(Eigen::MatrixXd::Zero(4, 4), 1e-9).edge_count() == 0);
    CHECK(adjacency(Eigen::Vector4d(1, 2, 3, 4).asDiagonal().toDenseMatrix(), 1e-9).edge_count() == 0);
    Eigen::Matrix2d m;
    m << 0, 5e-3, 1e-12, 0;
    const AdjacencyMatrix a = adjacency(m, 1e-9);
    Eigen::Matrix2i want;
    want << 0, 1, 0, 0;
    CHECK(a.a == want);
    CHECK(a.edge("n1", "n0"));
    CHECK_FALSE(a.edge("n0", "n1"));
}

TEST_CASE("plant adjacency structure") {
    const AdjacencyMatrix a = plant_adjacency(params(), reference());
    REQUIRE(a.size() == kNv);
    CHECK(a.edge("u3", "x23"));
    CHECK(a.edge("w1", "x23"));
    CHECK(a.edge("w2", "y1"));
    // Battery power drives the battery current.
    CHECK(a.edge("u7", "x18"));
    // Input and disturbance rows are empty.
    for (int i = kNx; i < kNx + kNu + kNw; ++i) CHECK(a.a.row(i).sum() == 0);
    // No self edges.
    for (int i = 0; i < a.size(); ++i) CHECK(a.a(i, i) == 0);

    const AdjacencyMatrix again = plant_adjacency(params(), reference());
    CHECK(again.a == a.a);
}

TEST_CASE("node labels") {
    const auto nodes = ies_nodes();
    REQUIRE(static_cast<int>(nodes.size()) == kNv);
    CHECK(nodes.front().label == "x1");
    CHECK(nodes[kNx - 1].label == "x23");
    CHECK(nodes[kNx + 2].label == "u3");
    CHECK(nodes[kNx + kNu].label == "w1");
    CHECK(nodes.back().label == "y2");
}

TEST_CASE("edge list and csv round trips") {
    const AdjacencyMatrix a = plant_adjacency(params(), reference());
    std::stringstream e;
    write_edge_list(e, a);
    const AdjacencyMatrix b = read_edge_list(e, ies_nodes());
    CHECK(b.a == a.a);

    std::stringstream c;
    write_adjacency_csv(c, a);
    const AdjacencyMatrix d = read_adjacency_csv(c);
    CHECK(d.a == a.a);
    REQUIRE(d.nodes.size() == a.nodes.size());
    CHECK(d.nodes[5].label == a.nodes[5].label);

    std::stringstream broken("x1 nowhere\n");
    CHECK_THROWS_AS(read_edge_list(broken, ies_nodes()), IoError);
}
