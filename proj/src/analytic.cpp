#include "kernmoment/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace kernmoment {

namespace {

void check_spd(const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != m.cols() || m.rows() < 1) throw NumericError(std::string(name) + " must be square and non-empty");
    if (!m.allFinite()) throw NumericError(std::string(name) + " has non-finite entries");
    const double tol = 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) throw NumericError(std::string(name) + " is not symmetric");
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& m, const char* name) {
    check_spd(m, name);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericError(std::string(name) + " is not positive definite");
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

std::vector<double> compute_etas(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma) {
    check_spd(sigma_x, "sigma_x");
    check_spd(sigma, "sigma");
    if (sigma_x.rows() != sigma.rows()) throw NumericError("compute_etas: dimension mismatch");
    factor(sigma_x, "sigma_x");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NumericError("sigma is not positive definite");
    const Eigen::MatrixXd inv_sqrt = es.operatorInverseSqrt();
    Eigen::MatrixXd sym = inv_sqrt * sigma_x * inv_sqrt;
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> congruent(sym, Eigen::EigenvaluesOnly);
    if (congruent.info() != Eigen::Success) throw NumericError("compute_etas: eigensolver failed");
    std::vector<double> etas(congruent.eigenvalues().data(), congruent.eigenvalues().data() + sym.rows());
    std::sort(etas.rbegin(), etas.rend());
    if (etas.back() <= 0.0) throw NumericError("compute_etas: non-positive eigenvalue");
    return etas;
}

RbfSpectrumSpec make_rbf_spec(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma) {
    return RbfSpectrumSpec{compute_etas(sigma_x, sigma)};
}

double phi_scalar(double z) {
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("phi_scalar: z must be positive and finite");
    return (1.0 + std::sqrt(1.0 + 4.0 * z)) / (2.0 * z);
}

double rbf_eigenvalue(const RbfSpectrumSpec& spec, const std::vector<int>& u) {
    if (static_cast<int>(u.size()) != spec.d())
        throw NumericError("rbf_eigenvalue: index has length " + std::to_string(u.size()) + ", expected " +
                           std::to_string(spec.d()));
    double log_lambda = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] < 0) throw NumericError("rbf_eigenvalue: negative index");
        const double eta = spec.etas[i];
        const double ph = phi_scalar(eta);
        log_lambda -= (1.0 + u[i]) * std::log(eta) + (1.0 + 2.0 * u[i]) * std::log(ph);
    }
    return std::exp(log_lambda);
}

EigenvalueList rbf_top_eigenvalues(const RbfSpectrumSpec& spec, int count) {
    if (count < 1) throw NumericError("rbf_top_eigenvalues: count must be >= 1");
    if (spec.d() < 1) throw NumericError("rbf_top_eigenvalues: empty spectrum spec");
    using Node = std::pair<double, std::vector<int>>;
    std::priority_queue<Node> heap;
    std::set<std::vector<int>> seen;
    std::vector<int> origin(static_cast<std::size_t>(spec.d()), 0);
    heap.emplace(rbf_eigenvalue(spec, origin), origin);
    seen.insert(origin);
    EigenvalueList out;
    while (static_cast<int>(out.values.size()) < count) {
        auto [lambda, u] = heap.top();
        heap.pop();
        out.values.push_back(lambda);
        for (std::size_t i = 0; i < u.size(); ++i) {
            std::vector<int> next = u;
            ++next[i];
            if (seen.insert(next).second) heap.emplace(rbf_eigenvalue(spec, next), next);
        }
    }
    // Ties from symmetric etas can pop in either order; equal values keep the list sorted.
    std::sort(out.values.rbegin(), out.values.rend());
    out.rank = static_cast<int>(std::count_if(out.values.begin(), out.values.end(), [](double v) { return v > 0.0; }));
    return out;
}

double rbf_moment(const RbfSpectrumSpec& spec, int n) {
    if (n < 1) throw NumericError("rbf_moment: n must be >= 1");
    double m = 1.0;
    for (double eta : spec.etas) {
        const double ph = phi_scalar(eta);
        m /= std::pow(eta * ph, n) - std::pow(ph, -n);
    }
    return m;
}

double block_circulant_moment(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma, int n) {
    if (n < 1) throw NumericError("block_circulant_moment: n must be >= 1");
    if (sigma_x.rows() != sigma.rows()) throw NumericError("block_circulant_moment: dimension mismatch");
    const Eigen::Index d = sigma.rows();
    const Eigen::Index size = d * n;
    if (size > 2000) throw NumericError("block_circulant_moment: n*d = " + std::to_string(size) + " exceeds 2000");
    const auto llt_x = factor(sigma_x, "sigma_x");
    const auto llt_s = factor(sigma, "sigma");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd sigma_inv = llt_s.solve(id);
    const Eigen::MatrixXd sigma_x_inv = llt_x.solve(id);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index k = 0; k < n; ++k) {
        m.block(k * d, k * d, d, d) += 2.0 * sigma_inv + sigma_x_inv;
        const Eigen::Index next = (k + 1) % n;
        m.block(k * d, next * d, d, d) -= sigma_inv;
        m.block(next * d, k * d, d, d) -= sigma_inv;
    }
    const auto llt_m = factor(0.5 * (m + m.transpose()), "block-circulant matrix");
    return std::exp(-0.5 * (static_cast<double>(n) * log_det(llt_x) + log_det(llt_m)));
}

MomentSequence rbf_moments(const RbfSpectrumSpec& spec, int n_max) {
    if (n_max < 1) throw NumericError("rbf_moments: n_max must be >= 1");
    MomentSequence out;
    out.estimator = EstimatorKind::Analytic;
    out.n_max = n_max;
    for (int n = 1; n <= n_max; ++n) out.values[n] = rbf_moment(spec, n);
    return out;
}

MomentSequence linear_process_moments(int d, double eigenvalue, int n_max) {
    if (d < 1) throw NumericError("linear_process_moments: d must be >= 1");
    if (!(eigenvalue > 0.0)) throw NumericError("linear_process_moments: eigenvalue must be positive");
    if (n_max < 1) throw NumericError("linear_process_moments: n_max must be >= 1");
    MomentSequence out;
    out.estimator = EstimatorKind::Analytic;
    out.n_max = n_max;
    for (int n = 1; n <= n_max; ++n) out.values[n] = d * std::pow(eigenvalue, n);
    return out;
}

}  // namespace kernmoment
