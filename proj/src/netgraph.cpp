#include "gridsyn/netgraph.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/plant.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace gridsyn {

std::vector<NodeId> ies_nodes() {
    std::vector<NodeId> nodes;
    nodes.reserve(kNv);
    auto add = [&](NodeKind k, int n, const char* prefix) {
        for (int i = 0; i < n; ++i) nodes.push_back({k, i, prefix + std::to_string(i + 1)});
    };
    add(NodeKind::State, kNx, "x");
    add(NodeKind::Input, kNu, "u");
    add(NodeKind::Disturbance, kNw, "w");
    add(NodeKind::Output, kNy, "y");
    return nodes;
}

std::vector<NodeId> generic_nodes(int n) {
    std::vector<NodeId> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({NodeKind::State, i, "n" + std::to_string(i)});
    return nodes;
}

JacobianSet jacobians(const VectorField& f, const VectorField& h, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& g, double h_rel) {
    const Eigen::VectorXd f0 = f(x, g);
    const Eigen::VectorXd y0 = h(x, g);
    const auto nx = x.size(), ng = g.size(), ny = y0.size();
    JacobianSet j;
    j.A.resize(nx, nx);
    j.B.resize(nx, ng);
    j.C.resize(ny, nx);
    j.D.resize(ny, ng);
    j.point_residual = f0.size() ? f0.cwiseAbs().maxCoeff() : 0.0;

    auto probe = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& gs, Eigen::VectorXd& fo,
                     Eigen::VectorXd& yo) {
        fo = f(xs, gs);
        yo = h(xs, gs);
        if (!fo.allFinite() || !yo.allFinite())
            throw NonFiniteDerivative("finite-difference probe produced a non-finite value");
    };
    Eigen::VectorXd fp, fm, yp, ym;
    for (Eigen::Index c = 0; c < nx; ++c) {
        const double step = h_rel * std::max(1.0, std::abs(x(c)));
        Eigen::VectorXd xp = x, xm = x;
        xp(c) += step;
        xm(c) -= step;
        probe(xp, g, fp, yp);
        probe(xm, g, fm, ym);
        j.A.col(c) = (fp - fm) / (2.0 * step);
        j.C.col(c) = (yp - ym) / (2.0 * step);
    }
    for (Eigen::Index c = 0; c < ng; ++c) {
        const double step = h_rel * std::max(1.0, std::abs(g(c)));
        Eigen::VectorXd gp = g, gm = g;
        gp(c) += step;
        gm(c) -= step;
        probe(x, gp, fp, yp);
        probe(x, gm, fm, ym);
        j.B.col(c) = (fp - fm) / (2.0 * step);
        j.D.col(c) = (yp - ym) / (2.0 * step);
    }
    return j;
}

JacobianSet plant_jacobians(const PlantParams& p, const OperatingPoint& op, double h_rel) {
    auto split = [](const Eigen::VectorXd& g, InputVec& u, DistVec& w) {
        u = g.head<kNu>();
        w = g.tail<kNw>();
    };
    VectorField f = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) -> Eigen::VectorXd {
        InputVec u;
        DistVec w;
        split(g, u, w);
        return derivatives(StateVec(x), u, op.z, w, p);
    };
    VectorField h = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) -> Eigen::VectorXd {
        InputVec u;
        DistVec w;
        split(g, u, w);
        return outputs(StateVec(x), u, op.z, w, p);
    };
    Eigen::VectorXd g(kNu + kNw);
    g << op.u, op.w;
    return jacobians(f, h, op.x, g, h_rel);
}

Eigen::MatrixXd augment(const JacobianSet& j) {
    const auto nx = j.A.rows(), ng = j.B.cols(), ny = j.C.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nx + ng + ny, nx + ng + ny);
    m.block(0, 0, nx, nx) = j.A;
    m.block(0, nx, nx, ng) = j.B;
    m.block(nx + ng, 0, ny, nx) = j.C;
    m.block(nx + ng, nx, ny, ng) = j.D;
    return m;
}

Eigen::MatrixXd row_scaled(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd s = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mx = m.cols() ? m.row(i).cwiseAbs().maxCoeff() : 0.0;
        s.row(i) /= std::max(1.0, mx);
    }
    return s;
}

int AdjacencyMatrix::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].label == label) return static_cast<int>(i);
    return -1;
}

bool AdjacencyMatrix::edge(const std::string& from, const std::string& to) const {
    const int j = index_of(from), i = index_of(to);
    return i >= 0 && j >= 0 && a(i, j) != 0;
}

AdjacencyMatrix adjacency(const Eigen::MatrixXd& m, double tol_abs, std::vector<NodeId> nodes) {
    AdjacencyMatrix out;
    out.a = Eigen::MatrixXi::Zero(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > tol_abs) out.a(i, j) = 1;
    out.nodes = nodes.empty() ? generic_nodes(static_cast<int>(m.rows())) : std::move(nodes);
    return out;
}

AdjacencyMatrix plant_adjacency(const PlantParams& p, const OperatingPoint& op, double h_rel,
                                double tol_abs) {
    return adjacency(row_scaled(augment(plant_jacobians(p, op, h_rel))), tol_abs, ies_nodes());
}

void write_edge_list(std::ostream& out, const AdjacencyMatrix& a) {
    for (int j = 0; j < a.size(); ++j)
        for (int i = 0; i < a.size(); ++i)
            if (a.a(i, j)) out << a.nodes[j].label << ' ' << a.nodes[i].label << '\n';
}

AdjacencyMatrix read_edge_list(std::istream& in, const std::vector<NodeId>& nodes) {
    AdjacencyMatrix a;
    a.nodes = nodes;
    a.a = Eigen::MatrixXi::Zero(nodes.size(), nodes.size());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream is(line);
        std::string from, to, extra;
        if (!(is >> from)) continue;
        if (!(is >> to) || (is >> extra))
            throw IoError("edge list line " + std::to_string(lineno) + ": expected '<from> <to>'");
        const int j = a.index_of(from), i = a.index_of(to);
        if (i < 0 || j < 0)
            throw IoError("edge list line " + std::to_string(lineno) + ": unknown node label");
        a.a(i, j) = 1;
    }
    return a;
}

void write_adjacency_csv(std::ostream& out, const AdjacencyMatrix& a) {
    out << "to\\from";
    for (auto& n : a.nodes) out << ',' << n.label;
    out << '\n';
    for (int i = 0; i < a.size(); ++i) {
        out << a.nodes[i].label;
        for (int j = 0; j < a.size(); ++j) out << ',' << a.a(i, j);
        out << '\n';
    }
}

AdjacencyMatrix read_adjacency_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("adjacency CSV is empty");
    std::vector<std::string> labels;
    {
        std::istringstream is(line);
        std::string cell;
        std::getline(is, cell, ',');
        while (std::getline(is, cell, ',')) labels.push_back(cell);
    }
    const int n = static_cast<int>(labels.size());
    const auto ies = ies_nodes();
    std::vector<NodeId> nodes;
    bool is_ies = n == kNv;
    for (int i = 0; is_ies && i < n; ++i) is_ies = ies[i].label == labels[i];
    if (is_ies) {
        nodes = ies;
    } else {
        for (int i = 0; i < n; ++i) nodes.push_back({NodeKind::State, i, labels[i]});
    }
    AdjacencyMatrix a;
    a.nodes = nodes;
    a.a = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw IoError("adjacency CSV is missing rows");
        std::istringstream is(line);
        std::string cell;
        std::getline(is, cell, ',');
        if (cell != labels[i]) throw IoError("adjacency CSV row label mismatch at '" + cell + "'");
        for (int j = 0; j < n; ++j) {
            if (!std::getline(is, cell, ',') || (cell != "0" && cell != "1"))
                throw IoError("adjacency CSV row " + labels[i] + ": expected 0/1 entries");
            a.a(i, j) = cell == "1";
        }
    }
    return a;
}

}  // namespace gridsyn
