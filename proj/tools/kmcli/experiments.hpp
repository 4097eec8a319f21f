#pragma once

#include "kernmoment/estimators.hpp"
#include "kernmoment/kernelproc.hpp"
#include "kernmoment/recovery.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace kmcli {

using kernmoment::EstimatorKind;
using kernmoment::Matrix;
using kernmoment::MomentSequence;

inline constexpr double kNoTruth = std::numeric_limits<double>::quiet_NaN();

/// Replicate statistics. variance is the population variance, so
/// mse = bias^2 + variance; se uses the sample variance. The interval is the
/// central 50% empirical range.
struct Summary {
    int count = 0;
    double mean = 0.0;
    double se = 0.0;
    double variance = 0.0;
    double truth = kNoTruth;
    double bias = kNoTruth;
    double mse = kNoTruth;
    double ci_low = 0.0;
    double ci_high = 0.0;

    /// (mean - truth) / se; NaN without a truth value.
    double z() const;
};

Summary summarize(const std::vector<double>& xs, double truth = kNoTruth);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> xs, double q);

struct EstimatorSettings {
    kernmoment::DpOptions dp{kernmoment::Orientation::Auto, 1};
    int repeats = 1;            // permutation repeats for dp
    std::uint64_t seed = 0;     // permutations and trial schedules
    kernmoment::KvOptions kv{};
};

/// Runs one estimator on the trials of one measurement. Single-matrix
/// estimators use trials[0]; dp-alt2 needs two trials and dp-altT at least two.
MomentSequence run_estimator(EstimatorKind kind, std::span<const Matrix> trials, int n_max,
                             const EstimatorSettings& settings);

struct ReplicateSpec {
    kernmoment::GenerativeProcess process;
    Eigen::Index p = 0;
    Eigen::Index q = 0;
    int n_max = 2;
    kernmoment::NoiseModel noise{};
    std::vector<EstimatorKind> estimators;
    int replicates = 1;
    std::uint64_t seed = 0;
    EstimatorSettings settings{};
    unsigned threads = 0;  // replicate workers; 0 = hardware concurrency
};

struct ReplicateResult {
    std::vector<EstimatorKind> estimators;
    int n_max = 0;
    /// samples[e][n - 1][r]
    std::vector<std::vector<std::vector<double>>> samples;
    std::optional<MomentSequence> truth;

    const std::vector<double>& at(EstimatorKind kind, int n) const;
    Summary summary(EstimatorKind kind, int n) const;
    double truth_at(int n) const;
};

/// Replicate r draws a fresh measurement from seed stream (seed, Replicate, r).
ReplicateResult run_replicates(const ReplicateSpec& spec);

std::uint64_t replicate_seed(std::uint64_t seed, int replicate);

/// Sum_i |a_i - b_i| over the common length.
double total_abs_error(const std::vector<double>& estimate, const std::vector<double>& truth);

struct RecoveryComparison {
    kernmoment::EigenvalueList ours;
    kernmoment::EigenvalueList kv;
    kernmoment::EigenvalueList svd;
    double ours_error = 0.0;
    double kv_error = 0.0;
    double svd_error = 0.0;
    double ours_objective = 0.0;
    double kv_objective = 0.0;
};

/// Recovers the spectrum from dp and kv-row moments of `phi` and compares
/// both, and the top eigenvalues of K/P, against `truth` (length cfg.d).
RecoveryComparison compare_recovery(const Matrix& phi, const kernmoment::RecoveryConfig& cfg,
                                    const std::vector<double>& truth, const EstimatorSettings& settings);

// Timing.

struct BenchPoint {
    std::string sweep;  // "p", "n" or "orientation"
    Eigen::Index p = 0;
    Eigen::Index q = 0;
    int n = 0;
    kernmoment::Orientation orientation = kernmoment::Orientation::AsIs;
    double seconds = 0.0;
};

struct BenchSpec {
    std::vector<Eigen::Index> p_grid{100, 200, 400, 800};
    Eigen::Index q_for_p = 200;
    int n_for_p = 4;
    std::vector<int> n_grid{2, 3, 4, 5, 6, 7, 8};
    Eigen::Index p_for_n = 200;
    Eigen::Index q_for_n = 400;
    Eigen::Index p_for_orientation = 150;  // Q = 4P
    int timing_repeats = 3;                // best of
    std::uint64_t seed = 1;
};

struct BenchResult {
    std::vector<BenchPoint> points;
    double p_exponent = 0.0;
    double n_exponent = 0.0;
    double asis_seconds = 0.0;        // P x 4P as-is
    double transposed_seconds = 0.0;  // P x 4P transposed
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BenchResult run_bench(const BenchSpec& spec);

/// RFF process used by the benchmark and the moment figures: d = 5,
/// sigma_x = I, sigma = 0.25 I.
kernmoment::GenerativeProcess fig2_process();

}  // namespace kmcli
