#pragma once

#include "kernmoment/common.hpp"
#include "kernmoment/moments.hpp"

#include <vector>

namespace kernmoment {

// Ground-truth spectra.
//
// For the RBF kernel exp(-(x-y)' sigma^-1 (x-y) / 2) with inputs
// x ~ N(0, sigma_x), let eta_i be the eigenvalues of sigma_x sigma^-1 and
// phi_z = (1 + sqrt(1 + 4z)) / (2z). Then the operator eigenvalues are
//
//   lambda_u = prod_i (eta_i^{1+u_i} phi_i^{1+2u_i})^{-1},  u in N^d,
//
// and the moments m(n) = sum_u lambda_u^n = prod_i 1 / (eta_i^n phi_i^n - phi_i^{-n}).

struct RbfSpectrumSpec {
    std::vector<double> etas;

    int d() const { return static_cast<int>(etas.size()); }
};

/// Non-increasing, nonnegative eigenvalues.
struct EigenvalueList {
    std::vector<double> values;
    int rank = 0;  // number of nonzero entries
};

/// Eigenvalues of sigma^{-1/2} sigma_x sigma^{-1/2}, sorted descending.
std::vector<double> compute_etas(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma);

RbfSpectrumSpec make_rbf_spec(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma);

double phi_scalar(double z);

double rbf_eigenvalue(const RbfSpectrumSpec& spec, const std::vector<int>& u);

/// The `count` largest lambda_u with multiplicity, via best-first search over N^d.
EigenvalueList rbf_top_eigenvalues(const RbfSpectrumSpec& spec, int count);

double rbf_moment(const RbfSpectrumSpec& spec, int n);

/// Independent evaluation of m(n) as a Gaussian integral over a cyclic chain:
/// (det(sigma_x)^n det M)^{-1/2} with M the nd x nd block-circulant matrix
/// with diagonal blocks 2 sigma^-1 + sigma_x^-1 and -sigma^-1 on the cyclic
/// neighbours. Refuses nd > 2000.
double block_circulant_moment(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma, int n);

/// MomentSequence of rbf_moment for n = 1..n_max, tagged Analytic.
MomentSequence rbf_moments(const RbfSpectrumSpec& spec, int n_max);

/// values[n] = d * eigenvalue^n: a rank-d operator with one d-fold eigenvalue.
MomentSequence linear_process_moments(int d, double eigenvalue, int n_max);

}  // namespace kernmoment
