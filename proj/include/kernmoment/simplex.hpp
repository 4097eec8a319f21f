#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kernmoment {

struct LpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    int pivots = 0;
};

/// Minimises c'x subject to A x = b, x >= 0, starting from a feasible basis
/// (one column index per row). Dense tableau, Bland's rule. Throws
/// NumericError if the starting basis is singular or infeasible, or if the
/// problem is unbounded.
LpResult simplex_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                          std::vector<int> basis, int max_pivots = 100000);

}  // namespace kernmoment
