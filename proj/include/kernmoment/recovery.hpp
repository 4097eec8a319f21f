#pragma once

#include "kernmoment/analytic.hpp"
#include "kernmoment/moments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kernmoment {

// Moment-to-spectrum recovery.
//
// Fits a probability vector p on grid points s_1 < ... < s_T in (0, b] by
//
//   min sum_{n=1..k} | m(n)/d - sum_i p_i s_i^n |   s.t.  p >= 0, sum p = 1,
//
// then reads d eigenvalues off the (d+1)-quantiles of p. Moments are divided
// by d so that a rank-d operator with sum_l lambda_l^n = m(n) maps onto a
// probability distribution.

struct RecoveryConfig {
    int d = 1;         // number of eigenvalues to recover
    double b = 0.0;    // grid upper bound; <= 0 selects default_upper_bound
    int t_count = 200; // grid size T
    int k = 1;         // moments n = 1..k enter the fit
};

struct SpectralGrid {
    std::vector<double> points;   // s_i = b (i+1) / T
    std::vector<double> weights;  // p_i
    double b = 0.0;
    int t_count = 0;
    double objective = 0.0;       // sum_n |m(n)/d - sum_i p_i s_i^n| at the optimum
};

/// 1.2 * min over n <= k with m(n) > 0 of m(n)^{1/n}. Each term bounds the
/// top eigenvalue from above.
double default_upper_bound(const MomentSequence& moments, int k);

/// Throws ConfigError for an invalid configuration, NumericError when the
/// moments are missing or non-finite.
SpectralGrid fit_density(const MomentSequence& moments, const RecoveryConfig& cfg);

/// lambda_i = smallest s with cumulative weight >= i/(d+1), sorted non-increasing.
EigenvalueList extract_eigenvalues(const SpectralGrid& grid, int d);

struct RecoveryResult {
    SpectralGrid grid;
    EigenvalueList eigenvalues;
};

RecoveryResult recover(const MomentSequence& moments, const RecoveryConfig& cfg);

/// Top `count` eigenvalues of K/P (equivalently squared singular values of
/// Phi / sqrt(PQ)), zero-padded to `count`.
EigenvalueList gram_eigenvalues(const Matrix& phi, int count);

/// CSV: "index,<column>,..." with one line per eigenvalue index (1-based);
/// columns shorter than the longest are left empty.
void write_eigenvalue_table(const std::filesystem::path& path, const std::vector<std::string>& names,
                            const std::vector<EigenvalueList>& columns, const std::string& comment = {});

}  // namespace kernmoment
