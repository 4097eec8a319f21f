#include "kernmoment/simplex.hpp"

#include "kernmoment/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kernmoment {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-12;

// Row-reduces tableau row r so that column `col` becomes the unit vector e_r.
void pivot(Eigen::MatrixXd& t, Eigen::Index r, Eigen::Index col) {
    t.row(r) /= t(r, col);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        if (i == r) continue;
        const double f = t(i, col);
        if (f != 0.0) t.row(i) -= f * t.row(r);
        t(i, col) = 0.0;
    }
    t(r, col) = 1.0;
}

}  // namespace

LpResult simplex_minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                          std::vector<int> basis, int max_pivots) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != m || c.size() != n || static_cast<Eigen::Index>(basis.size()) != m)
        throw NumericError("simplex: inconsistent problem dimensions");

    // Rows 0..m-1: [A | b]; row m: reduced costs [c | -objective].
    Eigen::MatrixXd t(m + 1, n + 1);
    t.topLeftCorner(m, n) = a;
    t.topRightCorner(m, 1) = b;
    t.bottomLeftCorner(1, n) = c.transpose();
    t(m, n) = 0.0;

    for (Eigen::Index r = 0; r < m; ++r) {
        const int col = basis[static_cast<std::size_t>(r)];
        if (col < 0 || col >= n || std::abs(t(r, col)) < kPivotTol) throw NumericError("simplex: singular starting basis");
        pivot(t, r, col);
    }
    for (Eigen::Index r = 0; r < m; ++r)
        if (t(r, n) < -1e-9) throw NumericError("simplex: starting basis is infeasible");

    LpResult result;
    for (;;) {
        // Bland: lowest-index improving column enters.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (t(m, j) < -kCostTol) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < m; ++r) {
            if (t(r, enter) <= kPivotTol) continue;
            const double ratio = std::max(t(r, n), 0.0) / t(r, enter);
            // Ties go to the lowest basic variable index.
            if (ratio < best - 1e-15 ||
                (ratio <= best + 1e-15 && leave >= 0 &&
                 basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
                best = std::min(best, ratio);
                leave = r;
            }
        }
        if (leave < 0) throw NumericError("simplex: problem is unbounded");
        pivot(t, leave, enter);
        basis[static_cast<std::size_t>(leave)] = static_cast<int>(enter);
        if (++result.pivots > max_pivots) throw NumericError("simplex: pivot limit exceeded");
    }

    result.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index r = 0; r < m; ++r) result.x[basis[static_cast<std::size_t>(r)]] = std::max(t(r, n), 0.0);
    result.objective = c.dot(result.x);
    return result;
}

}  // namespace kernmoment
