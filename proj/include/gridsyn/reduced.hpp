#pragma once

#include "gridsyn/params.hpp"
#include "gridsyn/types.hpp"

#include <Eigen/LU>

#include <vector>

namespace gridsyn {

// Solves the fast rows of the plant for quasi-steady state with the slow
// states, inputs and disturbances held. The Jacobian of the fast block is
// factorised once and reused (chord iteration) until reset() or a stall.
class QssSolver {
public:
    QssSolver(const PlantParams& p, std::vector<int> fast);

    // Returns x with its fast components at quasi-steady state.
    // Throws IntegrationDiverged if the iteration does not converge.
    StateVec solve(const StateVec& guess, const InputVec& u, const IntVec& z, const DistVec& w);

    void reset() { factored_ = false; }
    int factorisations() const { return factorisations_; }
    const std::vector<int>& fast() const { return fast_; }
    const PlantParams& params() const { return p_; }

private:
    void factor(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w);
    double scaled_residual(const Eigen::VectorXd& r, const StateVec& x) const;

    const PlantParams& p_;
    std::vector<int> fast_;
    Eigen::VectorXd tau_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    bool factored_ = false;
    int factorisations_ = 0;
};

// One RK4 step of the slow states over dt with the fast states re-solved at
// every stage. Returns the state at the end with fast components at QSS.
StateVec reduced_step(QssSolver& qss, const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                      double dt);

}  // namespace gridsyn
