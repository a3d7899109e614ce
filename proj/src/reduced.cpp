#include "gridsyn/reduced.hpp"

#include "gridsyn/errors.hpp"
#include "gridsyn/plant.hpp"

#include <algorithm>
#include <cmath>

namespace gridsyn {

QssSolver::QssSolver(const PlantParams& p, std::vector<int> fast) : p_(p), fast_(std::move(fast)) {
    tau_.resize(static_cast<Eigen::Index>(fast_.size()));
    for (size_t k = 0; k < fast_.size(); ++k) tau_(static_cast<Eigen::Index>(k)) = p_.tau_table(fast_[k]);
}

void QssSolver::factor(const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w) {
    const Eigen::Index nf = static_cast<Eigen::Index>(fast_.size());
    Eigen::MatrixXd J(nf, nf);
    StateVec xp = x;
    for (Eigen::Index j = 0; j < nf; ++j) {
        const int i = fast_[j];
        const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + h;
        const StateVec fp = derivatives(xp, u, z, w, p_);
        xp(i) = x(i) - h;
        const StateVec fm = derivatives(xp, u, z, w, p_);
        xp(i) = x(i);
        for (Eigen::Index r = 0; r < nf; ++r) J(r, j) = (fp(fast_[r]) - fm(fast_[r])) / (2 * h);
    }
    if (!J.allFinite()) throw NonFiniteDerivative("fast-block Jacobian is not finite");
    lu_.compute(J);
    factored_ = true;
    ++factorisations_;
}

double QssSolver::scaled_residual(const Eigen::VectorXd& r, const StateVec& x) const {
    double m = 0;
    for (Eigen::Index k = 0; k < r.size(); ++k)
        m = std::max(m, std::abs(r(k)) * tau_(k) / (1.0 + std::abs(x(fast_[k]))));
    return m;
}

StateVec QssSolver::solve(const StateVec& guess, const InputVec& u, const IntVec& z, const DistVec& w) {
    const Eigen::Index nf = static_cast<Eigen::Index>(fast_.size());
    StateVec x = guess;
    Eigen::VectorXd r(nf);
    auto residual = [&](const StateVec& s) {
        const StateVec f = derivatives(s, u, z, w, p_);
        for (Eigen::Index k = 0; k < nf; ++k) r(k) = f(fast_[k]);
    };
    if (!factored_) factor(x, u, z, w);
    bool refreshed = false;
    double prev = INFINITY;
    for (int it = 0; it < 60; ++it) {
        residual(x);
        const double res = scaled_residual(r, x);
        if (!std::isfinite(res)) break;
        if (res <= 1e-10) {
            // One more chord step keeps the result smooth in its arguments,
            // which finite-difference gradients through the model rely on.
            const Eigen::VectorXd dx = lu_.solve(r);
            for (Eigen::Index k = 0; k < nf; ++k) x(fast_[k]) -= dx(k);
            return x;
        }
        // Slow contraction means the stored Jacobian is stale.
        if (it > 0 && res > 0.5 * prev && !refreshed) {
            factor(x, u, z, w);
            refreshed = true;
        }
        prev = res;
        const Eigen::VectorXd dx = lu_.solve(r);
        for (Eigen::Index k = 0; k < nf; ++k) x(fast_[k]) -= dx(k);
    }
    throw IntegrationDiverged("quasi-steady fast states did not converge");
}

StateVec reduced_step(QssSolver& qss, const StateVec& x, const InputVec& u, const IntVec& z, const DistVec& w,
                      double dt) {
    const PlantParams& p = qss.params();
    auto rate = [&](const StateVec& s, StateVec& at) {
        at = qss.solve(s, u, z, w);
        StateVec f = derivatives(at, u, z, w, p);
        for (int i : qss.fast()) f(i) = 0.0;
        return f;
    };
    StateVec a, b;
    const StateVec k1 = rate(x, a);
    const StateVec k2 = rate(a + 0.5 * dt * k1, b);
    const StateVec k3 = rate(b + 0.5 * dt * k2, b);
    const StateVec k4 = rate(b + dt * k3, b);
    StateVec end = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int i : qss.fast()) end(i) = b(i);
    return qss.solve(end, u, z, w);
}

}  // namespace gridsyn
