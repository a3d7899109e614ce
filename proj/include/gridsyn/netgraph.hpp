#pragma once

#include "gridsyn/params.hpp"
#include "gridsyn/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gridsyn {

enum class NodeKind { State, Input, Disturbance, Output };

struct NodeId {
    NodeKind kind = NodeKind::State;
    int index = 0;          // zero-based within its kind
    std::string label;      // "x23", "u3", "w1", "y1"
    bool operator==(const NodeId& o) const { return kind == o.kind && index == o.index; }
};

// States, then inputs, then disturbances, then outputs.
std::vector<NodeId> ies_nodes();
// Plain nodes "n0".."n{n-1}" for graphs that are not the plant.
std::vector<NodeId> generic_nodes(int n);

struct JacobianSet {
    Eigen::MatrixXd A;   // n_x x n_x
    Eigen::MatrixXd B;   // n_x x n_g, columns [u; w]
    Eigen::MatrixXd C;   // n_y x n_x
    Eigen::MatrixXd D;   // n_y x n_g
    double point_residual = 0;   // max |f| at the linearisation point
};

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& g)>;

// Central differences with step h_rel * max(1, |v_i|) per coordinate.
// Throws NonFiniteDerivative if any probe is not finite.
JacobianSet jacobians(const VectorField& f, const VectorField& h, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& g, double h_rel = 1e-6);

JacobianSet plant_jacobians(const PlantParams& p, const OperatingPoint& op, double h_rel = 1e-6);

// [[A, B, 0], [0, 0, 0], [C, D, 0]] over the node order states, [u; w], outputs.
Eigen::MatrixXd augment(const JacobianSet& j);

// Divides each row by max(1, max |row entry|).
Eigen::MatrixXd row_scaled(const Eigen::MatrixXd& m);

struct AdjacencyMatrix {
    Eigen::MatrixXi a;           // a(i, j) = 1: edge from node j to node i
    std::vector<NodeId> nodes;

    int size() const { return static_cast<int>(a.rows()); }
    int edge_count() const { return a.sum(); }
    int index_of(const std::string& label) const;   // -1 if absent
    bool edge(const std::string& from, const std::string& to) const;
};

// a_ij = 1 iff |m(i, j)| > tol_abs and i != j.
AdjacencyMatrix adjacency(const Eigen::MatrixXd& m, double tol_abs,
                          std::vector<NodeId> nodes = {});

// The full pipeline used for the plant: jacobians, augment, row scaling, threshold.
AdjacencyMatrix plant_adjacency(const PlantParams& p, const OperatingPoint& op,
                                double h_rel = 1e-6, double tol_abs = 1e-8);

void write_edge_list(std::ostream& out, const AdjacencyMatrix& a);
AdjacencyMatrix read_edge_list(std::istream& in, const std::vector<NodeId>& nodes);
void write_adjacency_csv(std::ostream& out, const AdjacencyMatrix& a);
AdjacencyMatrix read_adjacency_csv(std::istream& in);

}  // namespace gridsyn
