#include "kernmoment/estimators.hpp"

#include <chrono>

namespace kernmoment {

Matrix gram_matrix(const Matrix& phi) {
    if (phi.rows() < 1 || phi.cols() < 1) throw NumericError("gram_matrix: empty matrix");
    Matrix k = phi * phi.transpose();
    k /= static_cast<double>(phi.cols());
    return k;
}

double first_moment(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw NumericError("first_moment: dimension mismatch");
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        acc += static_cast<long double>(a.data()[i]) * b.data()[i];
    return static_cast<double>(acc / static_cast<long double>(a.size()));
}

namespace {

// Eigenvalues of the smaller of Phi Phi' and Phi' Phi, scaled by 1/(PQ).
// Both share the nonzero spectrum of K/P.
Eigen::VectorXd scaled_gram_spectrum(const Matrix& phi) {
    const double scale = 1.0 / (static_cast<double>(phi.rows()) * static_cast<double>(phi.cols()));
    Eigen::MatrixXd g = phi.rows() <= phi.cols() ? Eigen::MatrixXd(phi * phi.transpose())
                                                 : Eigen::MatrixXd(phi.transpose() * phi);
    g *= scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("naive_moments: eigensolver failed");
    return es.eigenvalues();
}

}  // namespace

MomentSequence naive_moments(const Matrix& phi, int n_max) {
    if (n_max < 1) throw NumericError("naive_moments: n_max must be >= 1");
    if (phi.size() == 0) throw NumericError("naive_moments: empty matrix");
    const auto start = std::chrono::steady_clock::now();
    MomentSequence out;
    out.estimator = EstimatorKind::Naive;
    out.n_max = n_max;
    out.meta.p = phi.rows();
    out.meta.q = phi.cols();
    out.values[1] = first_moment(phi);
    if (n_max >= 2) {
        const Eigen::VectorXd mu = scaled_gram_spectrum(phi);
        for (int n = 2; n <= n_max; ++n) {
            long double acc = 0.0L;
            for (Eigen::Index i = 0; i < mu.size(); ++i) {
                const long double m = mu[i];
                long double pw = 1.0L;
                for (int r = 0; r < n; ++r) pw *= m;
                acc += pw;
            }
            out.values[n] = static_cast<double>(acc);
        }
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double exact_second_moment(const Matrix& phi) {
    const double p = static_cast<double>(phi.rows());
    const double q = static_cast<double>(phi.cols());
    if (phi.rows() < 2 || phi.cols() < 2)
        throw NumericError("exact_second_moment: requires P >= 2 and Q >= 2");

    // tr(K^2)/P^2 = ||Phi Phi'||_F^2 / (P^2 Q^2); use the smaller Gram.
    const Eigen::MatrixXd g = phi.rows() <= phi.cols() ? Eigen::MatrixXd(phi * phi.transpose())
                                                       : Eigen::MatrixXd(phi.transpose() * phi);
    long double frob = 0.0L;
    for (Eigen::Index i = 0; i < g.size(); ++i) frob += static_cast<long double>(g.data()[i]) * g.data()[i];

    long double row_diag = 0.0L;  // sum_i (Q K_ii)^2
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        long double s = 0.0L;
        for (Eigen::Index a = 0; a < phi.cols(); ++a) s += static_cast<long double>(phi(i, a)) * phi(i, a);
        row_diag += s * s;
    }
    long double col_diag = 0.0L;  // sum_alpha (P K~_alpha,alpha)^2
    for (Eigen::Index a = 0; a < phi.cols(); ++a) {
        long double s = 0.0L;
        for (Eigen::Index i = 0; i < phi.rows(); ++i) s += static_cast<long double>(phi(i, a)) * phi(i, a);
        col_diag += s * s;
    }
    long double fourth = 0.0L;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        const long double v = static_cast<long double>(phi.data()[i]) * phi.data()[i];
        fourth += v * v;
    }
    // Every term carries 1/(P^2 Q^2) once the Gram normalisations are expanded.
    const long double pq2 = static_cast<long double>(p) * p * q * q;
    const long double c = static_cast<long double>(p - 1) * (q - 1) / (static_cast<long double>(p) * q);
    const long double cm = (frob - row_diag - col_diag + fourth) / pq2;
    return static_cast<double>(cm / c);
}

MomentSequence exact_second_moments(const Matrix& phi) {
    const auto start = std::chrono::steady_clock::now();
    MomentSequence out;
    out.estimator = EstimatorKind::ExactN2;
    out.n_max = 2;
    out.meta.p = phi.rows();
    out.meta.q = phi.cols();
    out.values[1] = first_moment(phi);
    out.values[2] = exact_second_moment(phi);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace kernmoment
