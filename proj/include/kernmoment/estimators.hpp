#pragma once

#include "kernmoment/common.hpp"
#include "kernmoment/kernelproc.hpp"
#include "kernmoment/moments.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace kernmoment {

// Spectral-moment estimators for a P x Q measurement matrix Phi.
//
// All estimators target m(n) = sum_l lambda_l^n of the kernel integral
// operator. Conventions: K = Phi Phi' / Q (P x P), K~ = Phi' Phi / P (Q x Q).

/// K_ij = (1/Q) sum_alpha Phi_i,alpha Phi_j,alpha.
Matrix gram_matrix(const Matrix& phi);

/// (1/PQ) sum_{i,alpha} a_{i,alpha} b_{i,alpha}; with a = b this is the
/// unbiased first moment shared by every estimator.
double first_moment(const Matrix& a, const Matrix& b);
inline double first_moment(const Matrix& phi) { return first_moment(phi, phi); }

/// m0(n) = tr[(K/P)^n]. Biased for n >= 2.
MomentSequence naive_moments(const Matrix& phi, int n_max);

enum class KvOrientation { Row, Col };

struct KvOptions {
    /// Subtract the mean over observed samples before forming the Gram
    /// matrix (the zero-mean assumption of the original estimator).
    bool center = false;
};

/// Increasing-index estimator over a single sampled side:
/// tr(Kbar_up^{n-1} Kbar) / C(N, n), Kbar strictly upper triangular part.
/// Row: Kbar = Phi Phi'/Q, N = P. Col: Kbar = Phi' Phi / P, N = Q.
/// Throws NumericError when n_max > N.
MomentSequence kv_moments(const Matrix& phi, int n_max, KvOrientation orientation,
                          const KvOptions& options = {});

/// Average of the cyclic-path product over all ordered disjoint index tuples
/// for n = 2, via the closed form. Requires P, Q >= 2.
double exact_second_moment(const Matrix& phi);

/// {1: m0(1), 2: exact_second_moment}.
MomentSequence exact_second_moments(const Matrix& phi);

enum class Orientation { Auto, AsIs, Transposed };

struct DpOptions {
    Orientation orientation = Orientation::Auto;
    /// Worker threads for the anchor loop; 0 = hardware concurrency. The
    /// result is bit-identical for every thread count.
    unsigned threads = 0;
};

/// Which orientation Auto resolves to for a P x Q matrix.
Orientation resolve_orientation(Orientation requested, Eigen::Index p, Eigen::Index q);

/// Unbiased increasing-path estimator: the average of the cyclic-path product
/// over all strictly increasing row and column index tuples, normalised by
/// C(P,n) C(Q,n), computed by dynamic programming in O(n P^2 Q).
/// Transposed evaluates the same sum on phi', which pairs rows and columns
/// along the cycle in the opposite order, so its value differs from AsIs
/// (both are unbiased). values[1] equals first_moment(phi). Throws NumericError if
/// n_max > min(P, Q) or n_max < 1.
MomentSequence dp_moments(const Matrix& phi, int n_max, const DpOptions& options = {});

/// Two-trial alternating variant: path entries alternate between trial 1 and
/// trial 2, which cancels noise that is correlated within one trial.
MomentSequence dp_moments_alt2(const Matrix& trial1, const Matrix& trial2, int n_max,
                               const DpOptions& options = {});

/// Trial assignment for the 2n entries of a cyclic path.
///
/// path[0] = t_1 is the trial of the anchor entry (i_1, alpha_1); for order
/// n >= 2 the recursion multiplies entries from trials path[2n-3] (the entry
/// (i_n, alpha_{n-1})) and path[2n-2] (the entry (i_n, alpha_n)); the cycle
/// for order n is closed with closure[n-2] (the entry (i_1, alpha_n)).
/// Consecutive entries of a path, including the wrap pair, must come from
/// different trials.
struct TrialSchedule {
    std::vector<int> path;
    std::vector<int> closure;
};

/// Throws NumericError unless the schedule covers orders up to n_max with
/// trial ids in [0, trials) and satisfies the adjacency constraint.
void validate_schedule(const TrialSchedule& schedule, int trials, int n_max);

/// Draws a uniformly random admissible schedule.
TrialSchedule random_schedule(int trials, int n_max, std::uint64_t seed, std::uint64_t anchor);

/// T-trial alternating variant with one explicit schedule for every anchor.
MomentSequence dp_moments_altT(std::span<const Matrix> trials, int n_max,
                               const TrialSchedule& schedule, const DpOptions& options = {});

/// T-trial alternating variant; each anchor row draws its own schedule from
/// (seed, anchor). Requires T >= 2.
MomentSequence dp_moments_altT(std::span<const Matrix> trials, int n_max, std::uint64_t seed,
                               const DpOptions& options = {});

/// Averages dp_moments over `repeats` uniform row and column permutations.
/// Repeat 0 uses the identity permutation.
MomentSequence permuted_dp_moments(const Matrix& phi, int n_max, int repeats, std::uint64_t seed,
                                   const DpOptions& options = {});

// Exponential-time oracles. Both refuse to run past their enumeration budget.

inline constexpr double kBruteForceBudget = 1e7;

/// Direct enumeration of the increasing-path average.
double brute_force_increasing(const Matrix& phi, int n);

/// Direct enumeration over all ordered disjoint row and column tuples,
/// normalised by prod_{i<n} (P - i)(Q - i).
double brute_force_all_paths(const Matrix& phi, int n);

// Variance and concentration.

/// (1/P + 1/Q) f_n. Pass the raw variance of the cyclic product with
/// `f_is_raw_variance` to have it multiplied by n^2.
double variance_bound(int n, std::int64_t p, std::int64_t q, double f_n, bool f_is_raw_variance = false);

/// n^2 Var(prod_{i=1..n} phi(x_i, w_i) phi(x_{i+1}, w_i)), x_{n+1} = x_1,
/// estimated from `samples` fresh i.i.d. tuples.
double estimate_f(const GenerativeProcess& process, int n, std::int64_t samples, std::uint64_t seed);

/// sqrt(f_n / delta (1/P + 1/Q)): the deviation |m_hat(n) - m(n)| exceeded with
/// probability at most delta.
double chebyshev_error(int n, std::int64_t p, std::int64_t q, double f_n, double delta);

}  // namespace kernmoment
