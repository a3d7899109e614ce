#pragma once

#include "gridsyn/errors.hpp"

#include <algorithm>

namespace gridsyn {

template <typename Derived>
double modularity(const Eigen::MatrixBase<Derived>& a, const std::vector<int>& tags) {
    const Eigen::MatrixXd w = a.template cast<double>();
    const Eigen::Index n = w.rows();
    const double m = w.sum();
    if (m == 0.0) throw EmptyGraph("modularity of a graph without edges");
    // Untagged nodes behave as singletons.
    std::vector<int> c(tags.begin(), tags.end());
    int next = 0;
    for (int t : c) next = std::max(next, t + 1);
    for (int& t : c)
        if (t < 0) t = next++;
    std::vector<double> kin(next, 0.0), kout(next, 0.0), inner(next, 0.0);
    const Eigen::VectorXd row_sum = w.rowwise().sum();
    const Eigen::VectorXd col_sum = w.colwise().sum().transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        kin[c[i]] += row_sum(i);
        kout[c[i]] += col_sum(i);
        for (Eigen::Index j = 0; j < n; ++j)
            if (c[j] == c[i]) inner[c[i]] += w(i, j);
    }
    double q = 0.0;
    for (int k = 0; k < next; ++k) q += inner[k] - kin[k] * kout[k] / m;
    return q / m;
}

}  // namespace gridsyn
