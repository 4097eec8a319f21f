#include "kmcli/experiments.hpp"

#include "kmcli/config.hpp"

#include "kernmoment/parallel.hpp"
#include "kernmoment/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace kmcli {

using kernmoment::NumericError;

double Summary::z() const {
    if (std::isnan(truth)) return kNoTruth;
    if (se == 0.0) return mean == truth ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean - truth);
    return (mean - truth) / se;
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw NumericError("quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Summary summarize(const std::vector<double>& xs, double truth) {
    Summary s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    long double sum = 0.0L;
    for (double x : xs) sum += x;
    const long double mean = sum / xs.size();
    long double ss = 0.0L;
    for (double x : xs) ss += (x - mean) * (x - mean);
    s.mean = static_cast<double>(mean);
    s.variance = static_cast<double>(ss / xs.size());
    s.se = xs.size() > 1 ? static_cast<double>(std::sqrt(ss / (xs.size() - 1) / xs.size())) : 0.0;
    s.truth = truth;
    if (!std::isnan(truth)) {
        s.bias = s.mean - truth;
        s.mse = s.bias * s.bias + s.variance;
    }
    s.ci_low = quantile(xs, 0.25);
    s.ci_high = quantile(xs, 0.75);
    return s;
}

MomentSequence run_estimator(EstimatorKind kind, std::span<const Matrix> trials, int n_max,
                             const EstimatorSettings& settings) {
    if (trials.empty()) throw NumericError("no measurement matrix supplied");
    const Matrix& phi = trials[0];
    switch (kind) {
        case EstimatorKind::Naive: return kernmoment::naive_moments(phi, n_max);
        case EstimatorKind::KVRow: return kernmoment::kv_moments(phi, n_max, kernmoment::KvOrientation::Row, settings.kv);
        case EstimatorKind::KVCol: return kernmoment::kv_moments(phi, n_max, kernmoment::KvOrientation::Col, settings.kv);
        case EstimatorKind::ExactN2: return kernmoment::exact_second_moments(phi);
        case EstimatorKind::DP:
            return kernmoment::permuted_dp_moments(phi, n_max, settings.repeats, settings.seed, settings.dp);
        case EstimatorKind::DPAlt2:
            if (trials.size() < 2) throw NumericError("dp-alt2 needs two trials, got " + std::to_string(trials.size()));
            return kernmoment::dp_moments_alt2(trials[0], trials[1], n_max, settings.dp);
        case EstimatorKind::DPAltT:
            if (trials.size() < 2) throw NumericError("dp-altT needs at least two trials");
            return kernmoment::dp_moments_altT(trials, n_max, settings.seed, settings.dp);
        case EstimatorKind::BruteForceIncreasing:
        case EstimatorKind::BruteForceAllPaths: {
            MomentSequence m;
            m.estimator = kind;
            m.n_max = n_max;
            m.meta.p = phi.rows();
            m.meta.q = phi.cols();
            m.values[1] = kernmoment::first_moment(phi);
            for (int n = 2; n <= n_max; ++n)
                m.values[n] = kind == EstimatorKind::BruteForceIncreasing ? kernmoment::brute_force_increasing(phi, n)
                                                                          : kernmoment::brute_force_all_paths(phi, n);
            return m;
        }
        case EstimatorKind::Analytic: break;
    }
    throw kernmoment::ConfigError("'" + kernmoment::to_string(kind) + "' is not a sample estimator");
}

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) {
    return kernmoment::stream_key(seed, kernmoment::StreamDomain::Replicate, static_cast<std::uint64_t>(replicate));
}

const std::vector<double>& ReplicateResult::at(EstimatorKind kind, int n) const {
    for (std::size_t e = 0; e < estimators.size(); ++e)
        if (estimators[e] == kind) return samples[e].at(static_cast<std::size_t>(n - 1));
    throw NumericError("estimator " + kernmoment::to_string(kind) + " was not run");
}

double ReplicateResult::truth_at(int n) const {
    return truth && truth->has(n) ? truth->at(n) : kNoTruth;
}

Summary ReplicateResult::summary(EstimatorKind kind, int n) const { return summarize(at(kind, n), truth_at(n)); }

ReplicateResult run_replicates(const ReplicateSpec& spec) {
    if (spec.replicates < 1) throw kernmoment::ConfigError("replicates must be >= 1");
    ReplicateResult result;
    result.estimators = spec.estimators;
    result.n_max = spec.n_max;
    result.truth = ground_truth(spec.process, spec.n_max);
    const auto reps = static_cast<std::size_t>(spec.replicates);
    result.samples.assign(spec.estimators.size(),
                          std::vector<std::vector<double>>(static_cast<std::size_t>(spec.n_max),
                                                           std::vector<double>(reps, kNoTruth)));
    kernmoment::parallel_for(
        reps,
        [&](std::size_t r) {
            const std::uint64_t seed = replicate_seed(spec.seed, static_cast<int>(r));
            const auto ms = kernmoment::build_measurements(spec.process, spec.p, spec.q, spec.noise, seed);
            std::vector<Matrix> trials;
            for (const auto& m : ms) trials.push_back(m.entries);
            EstimatorSettings settings = spec.settings;
            settings.seed = kernmoment::stream_key(spec.settings.seed, kernmoment::StreamDomain::Replicate, r);
            for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
                const MomentSequence m = run_estimator(spec.estimators[e], trials, spec.n_max, settings);
                for (const auto& [n, v] : m.values)
                    if (n >= 1 && n <= spec.n_max) result.samples[e][static_cast<std::size_t>(n - 1)][r] = v;
            }
        },
        spec.threads);
    return result;
}

double total_abs_error(const std::vector<double>& estimate, const std::vector<double>& truth) {
    const std::size_t n = std::min(estimate.size(), truth.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(estimate[i] - truth[i]);
    return s;
}

RecoveryComparison compare_recovery(const Matrix& phi, const kernmoment::RecoveryConfig& cfg,
                                    const std::vector<double>& truth, const EstimatorSettings& settings) {
    const Matrix trials[] = {phi};
    const MomentSequence dp = run_estimator(EstimatorKind::DP, trials, cfg.k, settings);
    const MomentSequence kv = run_estimator(EstimatorKind::KVRow, trials, cfg.k, settings);
    RecoveryComparison out;
    const auto ours = kernmoment::recover(dp, cfg);
    const auto base = kernmoment::recover(kv, cfg);
    out.ours = ours.eigenvalues;
    out.kv = base.eigenvalues;
    out.ours_objective = ours.grid.objective;
    out.kv_objective = base.grid.objective;
    out.svd = kernmoment::gram_eigenvalues(phi, cfg.d);
    out.ours_error = total_abs_error(out.ours.values, truth);
    out.kv_error = total_abs_error(out.kv.values, truth);
    out.svd_error = total_abs_error(out.svd.values, truth);
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw NumericError("loglog_slope: need two or more paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

kernmoment::GenerativeProcess fig2_process() {
    return kernmoment::GenerativeProcess::rff(Eigen::MatrixXd::Identity(5, 5), 0.25 * Eigen::MatrixXd::Identity(5, 5));
}

namespace {

double time_dp(const Matrix& phi, int n, kernmoment::Orientation o, int repeats) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(repeats, 1); ++r) {
        const auto start = std::chrono::steady_clock::now();
        const auto m = kernmoment::dp_moments(phi, n, {o, 1});
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!std::isfinite(m.at(n))) throw NumericError("bench: non-finite estimate");
        best = std::min(best, s);
    }
    return best;
}

Matrix bench_matrix(Eigen::Index p, Eigen::Index q, std::uint64_t seed) {
    return kernmoment::build_measurements(fig2_process(), p, q, {}, seed)[0].entries;
}

}  // namespace

BenchResult run_bench(const BenchSpec& spec) {
    using kernmoment::Orientation;
    BenchResult out;
    std::vector<double> xs, ys;
    for (Eigen::Index p : spec.p_grid) {
        const Matrix phi = bench_matrix(p, spec.q_for_p, spec.seed);
        const double s = time_dp(phi, spec.n_for_p, Orientation::AsIs, spec.timing_repeats);
        out.points.push_back({"p", p, spec.q_for_p, spec.n_for_p, Orientation::AsIs, s});
        xs.push_back(static_cast<double>(p));
        ys.push_back(s);
    }
    out.p_exponent = loglog_slope(xs, ys);

    xs.clear();
    ys.clear();
    const Matrix phi_n = bench_matrix(spec.p_for_n, spec.q_for_n, spec.seed);
    for (int n : spec.n_grid) {
        const double s = time_dp(phi_n, n, Orientation::AsIs, spec.timing_repeats);
        out.points.push_back({"n", spec.p_for_n, spec.q_for_n, n, Orientation::AsIs, s});
        xs.push_back(static_cast<double>(n));
        ys.push_back(s);
    }
    out.n_exponent = loglog_slope(xs, ys);

    const Eigen::Index p = spec.p_for_orientation;
    const Matrix phi_o = bench_matrix(p, 4 * p, spec.seed);
    out.asis_seconds = time_dp(phi_o, spec.n_for_p, Orientation::AsIs, spec.timing_repeats);
    out.transposed_seconds = time_dp(phi_o, spec.n_for_p, Orientation::Transposed, spec.timing_repeats);
    out.points.push_back({"orientation", p, 4 * p, spec.n_for_p, Orientation::AsIs, out.asis_seconds});
    out.points.push_back({"orientation", p, 4 * p, spec.n_for_p, Orientation::Transposed, out.transposed_seconds});
    return out;
}

}  // namespace kmcli
