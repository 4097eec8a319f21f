// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run everything
//   acceptance 4 7        run the listed criteria only
//
// Exit status is nonzero when any selected criterion fails.

#include "kmcli/experiments.hpp"

#include "kernmoment/analytic.hpp"
#include "kernmoment/estimators.hpp"
#include "kernmoment/recovery.hpp"
#include "kernmoment/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace kernmoment;
using kmcli::ReplicateResult;
using kmcli::ReplicateSpec;
using kmcli::Summary;

namespace {

// Tolerances and experiment sizes.
constexpr double kOracleRelTol = 1e-10;
constexpr double kClosedFormRelTol = 1e-12;
constexpr double kAnalyticRelTol = 1e-8;
constexpr double kWorkedExampleRelTol = 1e-12;
constexpr double kBand = 3.0;  // standard errors
constexpr double kMpRelTol = 0.10;
constexpr double kChebyshevDelta = 0.1;
constexpr double kExponentP[2] = {1.8, 2.2};
constexpr double kExponentN[2] = {0.8, 1.2};

constexpr int kFig2Replicates = 100;
constexpr int kVarianceReplicates = 1000;
constexpr std::int64_t kVarianceTuples = 100000;
constexpr int kNoiseReplicates = 500;
constexpr double kNoiseSigma = 0.5;
constexpr int kRecoveryReplicates = 20;
constexpr int kMpReplicates = 50;
constexpr int kSubsampleReplicates = 30;
constexpr int kReluDim = 10;
constexpr Eigen::Index kReluRows = 300;
constexpr Eigen::Index kReluWidth = 1024;
constexpr Eigen::Index kReluSubsample = 128;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Matrix gaussian(Eigen::Index p, Eigen::Index q, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Matrix m(p, q);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d * d; ++i) a.data()[i] = normal(rng);
    return a * a.transpose() / d + 0.3 * Eigen::MatrixXd::Identity(d, d);
}

GenerativeProcess rff_iso(int d, double sigma) {
    return GenerativeProcess::rff(Eigen::MatrixXd::Identity(d, d), sigma * Eigen::MatrixXd::Identity(d, d));
}

// ---------------------------------------------------------------------------

Outcome ac1_oracle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> side(4, 8), order(2, 4);
    double worst_dp = 0.0, worst_closed = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int p = side(rng), q = side(rng), n = order(rng);
        const Matrix phi = gaussian(p, q, rng);
        // Each orientation runs the increasing-path sum on the matrix it is given.
        const Matrix phi_t = phi.transpose();
        worst_dp = std::max(worst_dp, rel(dp_moments(phi, n, {Orientation::AsIs, 1}).at(n), brute_force_increasing(phi, n)));
        worst_dp = std::max(worst_dp,
                            rel(dp_moments(phi, n, {Orientation::Transposed, 1}).at(n), brute_force_increasing(phi_t, n)));
        worst_closed = std::max(worst_closed, rel(exact_second_moment(phi), brute_force_all_paths(phi, 2)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst_dp <= kOracleRelTol && worst_closed <= kClosedFormRelTol && secs < 60.0,
            fmt("max rel err dp %.2e (tol %.0e), closed form %.2e (tol %.0e), %.2f s", worst_dp, kOracleRelTol,
                worst_closed, kClosedFormRelTol, secs)};
}

Outcome ac2_worked_example() {
    Matrix phi(2, 2);
    phi << 1, 2, 3, 4;
    const double dp = dp_moments(phi, 2).at(2);
    const double bi = brute_force_increasing(phi, 2);
    const double ba = brute_force_all_paths(phi, 2);
    const double nv = naive_moments(phi, 2).at(2);
    const double kv = kv_moments(phi, 2, KvOrientation::Row).at(2);
    const double cf = exact_second_moment(phi);
    const bool ok = rel(dp, 24) <= kWorkedExampleRelTol && rel(bi, 24) <= kWorkedExampleRelTol &&
                    rel(ba, 24) <= kWorkedExampleRelTol && rel(nv, 55.75) <= kWorkedExampleRelTol &&
                    rel(kv, 30.25) <= kWorkedExampleRelTol && rel(cf, 24) <= kWorkedExampleRelTol;
    return {ok, fmt("dp %.15g, brute increasing %.15g, brute all %.15g, naive %.15g, kv-row %.15g, closed form %.15g",
                    dp, bi, ba, nv, kv, cf)};
}

Outcome ac3_analytic() {
    std::mt19937_64 rng(77);
    double worst = 0.0, worst_m1 = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + t % 5;
        const Eigen::MatrixXd sx = random_spd(d, rng);
        const Eigen::MatrixXd sg = random_spd(d, rng);
        const RbfSpectrumSpec spec = make_rbf_spec(sx, sg);
        for (int n = 1; n <= 6; ++n) {
            const double a = rbf_moment(spec, n);
            const double b = block_circulant_moment(sx, sg, n);
            worst = std::max(worst, rel(a, b));
            if (n == 1) worst_m1 = std::max({worst_m1, std::abs(a - 1.0), std::abs(b - 1.0)});
        }
    }
    return {worst <= kAnalyticRelTol && worst_m1 <= kAnalyticRelTol,
            fmt("max rel diff closed form vs determinant %.2e (tol %.0e), max |m(1)-1| %.2e", worst, kAnalyticRelTol,
                worst_m1)};
}

// RFF moment replicates at P = 300, shared by criteria 4 and 5.
const ReplicateResult& fig2_replicates(Eigen::Index q, int n_max) {
    static std::map<Eigen::Index, ReplicateResult> cache;
    auto it = cache.find(q);
    if (it != cache.end() && it->second.n_max >= n_max) return it->second;
    ReplicateSpec spec{kmcli::fig2_process(), 300, q, n_max, {},
                       {EstimatorKind::Naive, EstimatorKind::KVRow, EstimatorKind::KVCol, EstimatorKind::DP},
                       kFig2Replicates, 2024, {}, 0};
    cache.insert_or_assign(q, kmcli::run_replicates(spec));
    return cache.at(q);
}

Outcome ac4_unbiasedness() {
    const ReplicateResult& res = fig2_replicates(600, 7);
    bool ok = true;
    std::ostringstream os;
    for (int n = 2; n <= 7; ++n) {
        const Summary dp = res.summary(EstimatorKind::DP, n);
        const bool inside = std::abs(dp.z()) <= kBand;
        bool smallest = true;
        for (auto other : {EstimatorKind::Naive, EstimatorKind::KVRow, EstimatorKind::KVCol})
            smallest = smallest && dp.mse < res.summary(other, n).mse;
        ok = ok && inside && smallest;
        os << fmt(" n=%d z=%+.2f mse dp/naive/kvr/kvc=%.2e/%.2e/%.2e/%.2e%s;", n, dp.z(), dp.mse,
                  res.summary(EstimatorKind::Naive, n).mse, res.summary(EstimatorKind::KVRow, n).mse,
                  res.summary(EstimatorKind::KVCol, n).mse, inside && smallest ? "" : " <-");
    }
    return {ok, os.str()};
}

Outcome ac5_bias_pattern() {
    std::ostringstream os;
    bool ok = true;
    for (Eigen::Index q : {150, 300, 600, 1200}) {
        const ReplicateResult& res = fig2_replicates(q, 3);
        const double zn = res.summary(EstimatorKind::Naive, 3).z();
        const double zc = res.summary(EstimatorKind::KVCol, 3).z();
        const double zr = res.summary(EstimatorKind::KVRow, 3).z();
        const double zd = res.summary(EstimatorKind::DP, 3).z();
        const Summary kvr = res.summary(EstimatorKind::KVRow, 3);
        os << fmt(" Q=%ld z naive/kvc/kvr/dp=%+.1f/%+.1f/%+.1f/%+.2f (kv-row rel bias %.2e);", static_cast<long>(q), zn,
                  zc, zr, zd, kvr.bias / kvr.truth);
        if (q == 1200)
            ok = std::abs(zn) > kBand && std::abs(zc) > kBand && std::abs(zr) <= kBand && std::abs(zd) <= kBand;
    }
    return {ok, os.str()};
}

Outcome ac6_variance_bound() {
    const auto process = rff_iso(3, 0.25);
    const RbfSpectrumSpec spec = make_rbf_spec(process.sigma_x(), process.sigma());
    ReplicateSpec rs{process, 50, 50, 3, {}, {EstimatorKind::DP}, kVarianceReplicates, 606, {}, 0};
    const ReplicateResult res = kmcli::run_replicates(rs);
    bool ok = true;
    std::ostringstream os;
    for (int n : {2, 3}) {
        const std::vector<double>& xs = res.at(EstimatorKind::DP, n);
        const Summary s = kmcli::summarize(xs);
        const double var = s.variance * xs.size() / (xs.size() - 1.0);
        const double f = estimate_f(process, n, kVarianceTuples, 707 + static_cast<std::uint64_t>(n));
        const double bound = variance_bound(n, 50, 50, f);
        const double radius = chebyshev_error(n, 50, 50, f, kChebyshevDelta);
        const double truth = rbf_moment(spec, n);
        const auto covered = std::count_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x - truth) <= radius; });
        const double coverage = static_cast<double>(covered) / static_cast<double>(xs.size());
        ok = ok && var <= bound && coverage >= 1.0 - kChebyshevDelta;
        os << fmt(" n=%d var %.3e <= bound %.3e, coverage %.3f (need %.2f);", n, var, bound, coverage,
                  1.0 - kChebyshevDelta);
    }
    return {ok, os.str()};
}

Outcome ac7_noise() {
    const auto process = rff_iso(3, 0.25);
    auto run = [&](NoiseKind kind, int trials, std::vector<EstimatorKind> ests) {
        ReplicateSpec rs{process, 75, 15, 4, {kind, kNoiseSigma, trials}, std::move(ests), kNoiseReplicates, 808, {}, 0};
        return kmcli::run_replicates(rs);
    };
    const ReplicateResult indep = run(NoiseKind::Independent, 1, {EstimatorKind::DP});
    const ReplicateResult corr = run(NoiseKind::RowColumnCorrelated, 2, {EstimatorKind::DP, EstimatorKind::DPAlt2});
    bool ok = true;
    std::ostringstream os;
    for (int n = 2; n <= 4; ++n) {
        const double zi = indep.summary(EstimatorKind::DP, n).z();
        const double zs = corr.summary(EstimatorKind::DP, n).z();
        const double za = corr.summary(EstimatorKind::DPAlt2, n).z();
        ok = ok && std::abs(zi) <= kBand && std::abs(zs) > kBand && std::abs(za) <= kBand;
        os << fmt(" n=%d z indep dp %+.2f, rowcol dp %+.1f, rowcol alt2 %+.2f;", n, zi, zs, za);
    }
    return {ok, os.str()};
}

Outcome ac8_recovery() {
    const auto process = GenerativeProcess::linear(Eigen::MatrixXd::Identity(20, 20), std::sqrt(0.3));
    const RecoveryConfig cfg{20, 1.0, 200, 10};
    const std::vector<double> truth(20, 0.3);
    std::vector<double> ours, kv, svd;
    for (int r = 0; r < kRecoveryReplicates; ++r) {
        const auto m = build_measurements(process, 100, 100, {}, kmcli::replicate_seed(909, r));
        const auto c = kmcli::compare_recovery(m[0].entries, cfg, truth, {});
        ours.push_back(c.ours_error);
        kv.push_back(c.kv_error);
        svd.push_back(c.svd_error);
    }
    const double mo = kmcli::quantile(ours, 0.5), mk = kmcli::quantile(kv, 0.5), ms = kmcli::quantile(svd, 0.5);
    return {mo < mk && mo < ms, fmt("median total |error| ours %.4f, kv-row %.4f, svd %.4f", mo, mk, ms)};
}

Outcome ac9_marchenko_pastur() {
    const int d = 4000;
    const Eigen::Index p = 40, q = 80;
    const auto process = GenerativeProcess::linear(Eigen::MatrixXd::Identity(d, d), 1.0 / std::sqrt(d));
    ReplicateSpec rs{process, p, q, 2, {}, {EstimatorKind::Naive, EstimatorKind::DP}, kMpReplicates, 1001, {}, 0};
    const ReplicateResult res = kmcli::run_replicates(rs);
    const Summary nv = res.summary(EstimatorKind::Naive, 2);
    const Summary dp = res.summary(EstimatorKind::DP, 2);
    const double mp = 1.0 + static_cast<double>(p) / static_cast<double>(q);
    const double naive_scaled = p * nv.mean;
    const bool naive_ok = std::abs(naive_scaled - mp) <= kMpRelTol * mp;
    const bool dp_ok = std::abs(dp.z()) <= kBand;
    return {naive_ok && dp_ok, fmt("P*naive %.4f vs 1+P/Q %.4f (tol %.0f%%); P*dp %.4f +- %.4f vs P*m(2) %.4f (z %+.2f)",
                                   naive_scaled, mp, 100 * kMpRelTol, p * dp.mean, p * dp.se, p * dp.truth, dp.z())};
}

Outcome ac10_complexity() {
    const kmcli::BenchResult b = kmcli::run_bench({});
    const bool p_ok = b.p_exponent >= kExponentP[0] && b.p_exponent <= kExponentP[1];
    const bool n_ok = b.n_exponent >= kExponentN[0] && b.n_exponent <= kExponentN[1];
    const bool t_ok = b.transposed_seconds < b.asis_seconds;
    // Informational: slope against the number of dp steps (n - 1), and the
    // complementary P = 4Q shape where transposing removes the quadratic side.
    std::vector<double> steps, secs;
    double t4 = 0, t8 = 0;
    for (const auto& pt : b.points)
        if (pt.sweep == "n") {
            steps.push_back(pt.n - 1.0);
            secs.push_back(pt.seconds);
            if (pt.n == 4) t4 = pt.seconds;
            if (pt.n == 8) t8 = pt.seconds;
        }
    const Matrix tall = build_measurements(kmcli::fig2_process(), 600, 150, {}, 5)[0].entries;
    const double tall_asis = dp_moments(tall, 4, {Orientation::AsIs, 1}).wall_seconds;
    const double tall_t = dp_moments(tall, 4, {Orientation::Transposed, 1}).wall_seconds;
    return {p_ok && n_ok && t_ok,
            fmt("P exponent %.3f%s; n exponent %.3f%s; Q=4P transposed %.3f s vs as-is %.3f s%s | info: slope vs (n-1) "
                "%.3f, T(8)/T(4) %.2f, P=4Q transposed %.3f s vs as-is %.3f s",
                b.p_exponent, p_ok ? "" : " <-", b.n_exponent, n_ok ? "" : " <-", b.transposed_seconds, b.asis_seconds,
                t_ok ? "" : " <-", kmcli::loglog_slope(steps, secs), t8 / t4, tall_t, tall_asis)};
}

// One fixed input set; each replicate is a fresh network of kReluWidth units
// observed in full and through kReluSubsample randomly chosen units. The
// naive estimate from the subsample is compared against the 50% interval of
// dp on all units.
Outcome ac11_subsampling() {
    const auto process = GenerativeProcess::relu(Eigen::MatrixXd::Identity(kReluDim, kReluDim));
    const Matrix inputs = sample_inputs(process, kReluRows, 1110);
    std::map<std::string, std::vector<double>> samples;
    for (int r = 0; r < kSubsampleReplicates; ++r) {
        const std::uint64_t seed = kmcli::replicate_seed(1111, r);
        const Matrix full = evaluate_matrix(process, inputs, sample_features(process, kReluWidth, seed));
        std::vector<Eigen::Index> cols(static_cast<std::size_t>(kReluWidth));
        std::iota(cols.begin(), cols.end(), 0);
        auto rng = make_stream(seed, StreamDomain::Subsample);
        std::shuffle(cols.begin(), cols.end(), rng);
        Matrix sub(kReluRows, kReluSubsample);
        for (Eigen::Index a = 0; a < kReluSubsample; ++a) sub.col(a) = full.col(cols[static_cast<std::size_t>(a)]);
        const auto dp_full = dp_moments(full, 4, {Orientation::Auto, 0});
        const auto dp_sub = dp_moments(sub, 4, {Orientation::Auto, 0});
        const auto nv_sub = naive_moments(sub, 4);
        for (int n = 2; n <= 4; ++n) {
            samples["dp_full" + std::to_string(n)].push_back(dp_full.at(n));
            samples["dp_sub" + std::to_string(n)].push_back(dp_sub.at(n));
            samples["nv_sub" + std::to_string(n)].push_back(nv_sub.at(n));
        }
    }
    bool ok = true;
    std::ostringstream os;
    for (int n = 2; n <= 4; ++n) {
        const std::string k = std::to_string(n);
        const Summary df = kmcli::summarize(samples["dp_full" + k]);
        const Summary ds = kmcli::summarize(samples["dp_sub" + k]);
        const Summary ns = kmcli::summarize(samples["nv_sub" + k]);
        const bool dp_agree = df.ci_low <= ds.ci_high && ds.ci_low <= df.ci_high;
        const bool nv_apart = ns.mean < df.ci_low || ns.mean > df.ci_high;
        ok = ok && dp_agree && nv_apart;
        os << fmt(" n=%d dp Q=%ld [%.4g,%.4g] vs Q=%ld [%.4g,%.4g] %s, naive Q=%ld mean %.4g %s;", n,
                  static_cast<long>(kReluWidth), df.ci_low, df.ci_high, static_cast<long>(kReluSubsample), ds.ci_low,
                  ds.ci_high, dp_agree ? "overlap" : "disjoint", static_cast<long>(kReluSubsample), ns.mean,
                  nv_apart ? "outside" : "inside");
    }
    return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "oracle equivalence", ac1_oracle},
        {2, "worked micro-example", ac2_worked_example},
        {3, "analytic cross-validation", ac3_analytic},
        {4, "unbiasedness at desk scale", ac4_unbiasedness},
        {5, "asymptotic bias pattern", ac5_bias_pattern},
        {6, "variance bound", ac6_variance_bound},
        {7, "noise robustness", ac7_noise},
        {8, "eigenvalue recovery", ac8_recovery},
        {9, "Marchenko-Pastur sanity", ac9_marchenko_pastur},
        {10, "complexity", ac10_complexity},
        {11, "subsampling consistency", ac11_subsampling},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("AC%-2d %s  %s [%.1f s]: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
