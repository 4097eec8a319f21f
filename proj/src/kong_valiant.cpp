#include "kernmoment/estimators.hpp"

#include <chrono>

namespace kernmoment {

MomentSequence kv_moments(const Matrix& phi, int n_max, KvOrientation orientation, const KvOptions& options) {
    if (n_max < 1) throw NumericError("kv_moments: n_max must be >= 1");
    if (phi.size() == 0) throw NumericError("kv_moments: empty matrix");
    const auto start = std::chrono::steady_clock::now();

    // Observed-sample axis runs down the rows of `bar`.
    Eigen::MatrixXd bar = orientation == KvOrientation::Row ? Eigen::MatrixXd(phi) : Eigen::MatrixXd(phi.transpose());
    const Eigen::Index side = bar.rows();
    if (n_max > side)
        throw NumericError("kv_moments: n_max = " + std::to_string(n_max) + " exceeds the sampled side " +
                           std::to_string(side) + "; C(N, n) normalisation undefined");
    if (options.center) bar.rowwise() -= bar.colwise().mean();

    MomentSequence out;
    out.estimator = orientation == KvOrientation::Row ? EstimatorKind::KVRow : EstimatorKind::KVCol;
    out.n_max = n_max;
    out.meta.p = phi.rows();
    out.meta.q = phi.cols();

    const Eigen::MatrixXd kbar = (bar * bar.transpose()) / static_cast<double>(bar.cols());
    out.values[1] = kbar.trace() / static_cast<double>(side);
    if (n_max >= 2) {
        const Eigen::MatrixXd up = kbar.triangularView<Eigen::StrictlyUpper>();
        Eigen::MatrixXd power = up;  // Kbar_up^{n-1}
        for (int n = 2; n <= n_max; ++n) {
            // tr(A B) = sum_ij A_ij B_ji, and Kbar is symmetric.
            long double tr = 0.0L;
            for (Eigen::Index i = 0; i < power.size(); ++i)
                tr += static_cast<long double>(power.data()[i]) * kbar.data()[i];
            out.values[n] = static_cast<double>(tr / static_cast<long double>(binomial(side, n)));
            if (n < n_max) power = (power * up).eval();
        }
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace kernmoment
