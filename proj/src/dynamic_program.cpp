#include "kernmoment/estimators.hpp"
#include "kernmoment/parallel.hpp"
#include "kernmoment/rng.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <numeric>
#include <random>

namespace kernmoment {

namespace {

// Sources of the matrix entries visited by a cyclic path anchored at row h.
// For a single measurement every slot points at the same matrix; the
// alternating variants route each slot to a trial.
//
//   init       entry (i_1, alpha_1)
//   row_step   entry (i_n, alpha_{n-1}), indexed by order n
//   col_step   entry (i_n, alpha_n),     indexed by order n
//   closure    entry (i_1, alpha_n),     indexed by order n
struct PathSources {
    const Matrix* init = nullptr;
    std::vector<const Matrix*> row_step;
    std::vector<const Matrix*> col_step;
    std::vector<const Matrix*> closure;
};

PathSources uniform_sources(const Matrix& first, const Matrix& second, int n_max) {
    // Trials alternate: entries at odd path positions come from `first`.
    PathSources s;
    s.init = &first;
    s.row_step.assign(static_cast<std::size_t>(n_max) + 1, &second);
    s.col_step.assign(static_cast<std::size_t>(n_max) + 1, &first);
    s.closure.assign(static_cast<std::size_t>(n_max) + 1, &second);
    return s;
}

PathSources schedule_sources(std::span<const Matrix> trials, const TrialSchedule& schedule, int n_max) {
    PathSources s;
    s.init = &trials[static_cast<std::size_t>(schedule.path[0])];
    s.row_step.assign(static_cast<std::size_t>(n_max) + 1, nullptr);
    s.col_step.assign(static_cast<std::size_t>(n_max) + 1, nullptr);
    s.closure.assign(static_cast<std::size_t>(n_max) + 1, nullptr);
    for (int n = 2; n <= n_max; ++n) {
        const auto un = static_cast<std::size_t>(n);
        s.row_step[un] = &trials[static_cast<std::size_t>(schedule.path[static_cast<std::size_t>(2 * n - 3)])];
        s.col_step[un] = &trials[static_cast<std::size_t>(schedule.path[static_cast<std::size_t>(2 * n - 2)])];
        s.closure[un] = &trials[static_cast<std::size_t>(schedule.closure[static_cast<std::size_t>(n - 2)])];
    }
    return s;
}

// Per-anchor partial sums S^(h)[n] of the increasing-path recursion.
//
// S^(h)_ab[n] accumulates, over increasing row tuples h < i_2 < ... < i_n = a
// and increasing column tuples alpha_1 < ... < alpha_n = b, the path product
// up to and including entry (a, b), rescaled so that closing the cycle and
// dividing by P yields the C(P,n) C(Q,n) average. Only rows a >= h are
// stored. Entries with a < h + n - 1 or b < n - 1 (0-based) are zero.
class AnchorRecursion {
public:
    AnchorRecursion(Eigen::Index p, Eigen::Index q)
        : p_(p), q_(q), s_(static_cast<std::size_t>(p * q)), fresh_(static_cast<std::size_t>(q)),
          colsum_(static_cast<std::size_t>(q)) {}

    // Writes m^(h)(n) into out[n] for n = 2..n_top, where n_top = min(n_max, P - h).
    void run(Eigen::Index h, const PathSources& src, int n_max, std::vector<long double>& out) {
        const Eigen::Index rows = p_ - h;
        const int n_top = static_cast<int>(std::min<Eigen::Index>(n_max, rows));
        std::fill(s_.begin(), s_.begin() + rows * q_, 0.0);
        const double pd = static_cast<double>(p_);
        const double qd = static_cast<double>(q_);
        for (Eigen::Index b = 0; b < q_; ++b) s_[static_cast<std::size_t>(b)] = pd * (*src.init)(h, b);

        for (int n = 2; n <= n_top; ++n) {
            const Matrix& row_src = *src.row_step[static_cast<std::size_t>(n)];
            const Matrix& col_src = *src.col_step[static_cast<std::size_t>(n)];
            const double scale = static_cast<double>(n) * n / ((pd - n + 1) * (qd - n + 1));
            std::fill(colsum_.begin(), colsum_.end(), 0.0L);
            // Rows of S[n-1] below local row n-2 are zero; so are the rows of S[n] up to it.
            const Eigen::Index first = n - 2;
            for (Eigen::Index r = first; r < rows; ++r) {
                const Eigen::Index a = h + r;
                const double* phi_row = row_src.data() + a * q_;
                const double* psi_row = col_src.data() + a * q_;
                double* s_row = s_.data() + r * q_;
                // fresh_b = scale * Psi_ab * sum_{k<b} Phi_ak * sum_{l<a} S_lk
                long double run = 0.0L;
                for (Eigen::Index b = 0; b < q_; ++b) {
                    fresh_[static_cast<std::size_t>(b)] = static_cast<double>(scale * psi_row[b] * run);
                    run += colsum_[static_cast<std::size_t>(b)] * phi_row[b];
                }
                for (Eigen::Index b = 0; b < q_; ++b) {
                    colsum_[static_cast<std::size_t>(b)] += s_row[b];
                    s_row[b] = fresh_[static_cast<std::size_t>(b)];
                }
            }
            const double* close_row = src.closure[static_cast<std::size_t>(n)]->data() + h * q_;
            long double acc = 0.0L;
            for (Eigen::Index r = n - 1; r < rows; ++r) {
                const double* s_row = s_.data() + r * q_;
                long double row_acc = 0.0L;
                for (Eigen::Index b = n - 1; b < q_; ++b) row_acc += static_cast<long double>(s_row[b]) * close_row[b];
                acc += row_acc;
            }
            out[static_cast<std::size_t>(n)] = acc / (static_cast<long double>(pd) * qd);
        }
    }

private:
    Eigen::Index p_, q_;
    std::vector<double> s_;
    std::vector<double> fresh_;
    std::vector<long double> colsum_;
};

// Runs the recursion for every anchor and reduces in anchor order.
template <typename SourcesFor>
std::vector<double> increasing_path_sums(Eigen::Index p, Eigen::Index q, int n_max, unsigned threads,
                                         SourcesFor&& sources_for) {
    const auto anchors = static_cast<std::size_t>(std::max<Eigen::Index>(p - 1, 0));
    std::vector<std::vector<long double>> per_anchor(anchors);
    if (threads == 0) threads = default_thread_count();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(anchors, 1)));
    // One scratch recursion per worker slot; anchors are dealt round-robin.
    parallel_for(
        threads,
        [&](std::size_t worker) {
            AnchorRecursion rec(p, q);
            for (std::size_t h = worker; h < anchors; h += threads) {
                per_anchor[h].assign(static_cast<std::size_t>(n_max) + 1, 0.0L);
                const PathSources& src = sources_for(static_cast<Eigen::Index>(h));
                rec.run(static_cast<Eigen::Index>(h), src, n_max, per_anchor[h]);
            }
        },
        threads);
    std::vector<double> result(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int n = 2; n <= n_max; ++n) {
        long double total = 0.0L;
        for (std::size_t h = 0; h < anchors; ++h) total += per_anchor[h][static_cast<std::size_t>(n)];
        result[static_cast<std::size_t>(n)] = static_cast<double>(total / static_cast<long double>(p));
    }
    return result;
}

void check_order(int n_max, Eigen::Index p, Eigen::Index q, const char* who) {
    if (n_max < 1) throw NumericError(std::string(who) + ": n_max must be >= 1");
    if (n_max > std::min(p, q))
        throw NumericError(std::string(who) + ": n_max = " + std::to_string(n_max) + " exceeds min(P, Q) = " +
                           std::to_string(std::min(p, q)) + "; no increasing index tuple exists");
}

void check_trials(std::span<const Matrix> trials, const char* who) {
    if (trials.size() < 2) throw NumericError(std::string(who) + ": at least two trials are required");
    for (const Matrix& m : trials)
        if (m.rows() != trials[0].rows() || m.cols() != trials[0].cols())
            throw NumericError(std::string(who) + ": trial matrices differ in shape");
}

// Transposes every trial when the resolved orientation asks for it.
std::vector<Matrix> oriented(std::span<const Matrix> trials, Orientation o) {
    std::vector<Matrix> out;
    out.reserve(trials.size());
    for (const Matrix& m : trials) out.push_back(o == Orientation::Transposed ? Matrix(m.transpose()) : m);
    return out;
}

MomentSequence assemble(EstimatorKind kind, const Matrix& shape, int n_max, double first,
                        const std::vector<double>& sums, int trials,
                        std::chrono::steady_clock::time_point start) {
    MomentSequence out;
    out.estimator = kind;
    out.n_max = n_max;
    out.meta.p = shape.rows();
    out.meta.q = shape.cols();
    out.meta.trials = trials;
    out.values[1] = first;
    for (int n = 2; n <= n_max; ++n) out.values[n] = sums[static_cast<std::size_t>(n)];
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace

Orientation resolve_orientation(Orientation requested, Eigen::Index p, Eigen::Index q) {
    if (requested != Orientation::Auto) return requested;
    // Work is O(n P^2 Q) as-is and O(n P Q^2) transposed.
    return q < p ? Orientation::Transposed : Orientation::AsIs;
}

MomentSequence dp_moments(const Matrix& phi, int n_max, const DpOptions& options) {
    check_order(n_max, phi.rows(), phi.cols(), "dp_moments");
    const auto start = std::chrono::steady_clock::now();
    const Orientation o = resolve_orientation(options.orientation, phi.rows(), phi.cols());
    const Matrix work = o == Orientation::Transposed ? Matrix(phi.transpose()) : phi;
    const PathSources src = uniform_sources(work, work, n_max);
    const auto sums = increasing_path_sums(work.rows(), work.cols(), n_max, options.threads,
                                           [&](Eigen::Index) -> const PathSources& { return src; });
    return assemble(EstimatorKind::DP, phi, n_max, first_moment(phi), sums, 1, start);
}

MomentSequence dp_moments_alt2(const Matrix& trial1, const Matrix& trial2, int n_max, const DpOptions& options) {
    const std::array<Matrix, 2> pair{trial1, trial2};
    check_trials(pair, "dp_moments_alt2");
    check_order(n_max, trial1.rows(), trial1.cols(), "dp_moments_alt2");
    const auto start = std::chrono::steady_clock::now();
    const Orientation o = resolve_orientation(options.orientation, trial1.rows(), trial1.cols());
    const auto work = oriented(pair, o);
    const PathSources src = uniform_sources(work[0], work[1], n_max);
    const auto sums = increasing_path_sums(work[0].rows(), work[0].cols(), n_max, options.threads,
                                           [&](Eigen::Index) -> const PathSources& { return src; });
    return assemble(EstimatorKind::DPAlt2, trial1, n_max, first_moment(trial1, trial2), sums, 2, start);
}

void validate_schedule(const TrialSchedule& schedule, int trials, int n_max) {
    if (trials < 2) throw NumericError("trial schedule: at least two trials are required");
    const auto path_len = static_cast<std::size_t>(std::max(2 * n_max - 1, 2));
    const auto closure_len = static_cast<std::size_t>(std::max(n_max - 1, 0));
    if (schedule.path.size() < path_len || schedule.closure.size() < closure_len)
        throw NumericError("trial schedule: too short for n_max = " + std::to_string(n_max));
    auto in_range = [&](int t) { return t >= 0 && t < trials; };
    for (std::size_t i = 0; i < path_len; ++i)
        if (!in_range(schedule.path[i])) throw NumericError("trial schedule: trial id out of range");
    for (std::size_t i = 0; i + 1 < path_len; ++i)
        if (schedule.path[i] == schedule.path[i + 1])
            throw NumericError("trial schedule: adjacent path entries " + std::to_string(i + 1) + " and " +
                               std::to_string(i + 2) + " share trial " + std::to_string(schedule.path[i]));
    for (int n = 2; n <= n_max; ++n) {
        const int t = schedule.closure[static_cast<std::size_t>(n - 2)];
        if (!in_range(t)) throw NumericError("trial schedule: trial id out of range");
        if (t == schedule.path[static_cast<std::size_t>(2 * n - 2)] || t == schedule.path[0])
            throw NumericError("trial schedule: closing entry for n = " + std::to_string(n) +
                               " repeats the trial of a neighbouring entry");
    }
}

TrialSchedule random_schedule(int trials, int n_max, std::uint64_t seed, std::uint64_t anchor) {
    if (trials < 2) throw NumericError("random_schedule: at least two trials are required");
    auto rng = make_stream(seed, StreamDomain::TrialSchedule, anchor);
    auto pick_except = [&](int a, int b) {
        std::vector<int> allowed;
        for (int t = 0; t < trials; ++t)
            if (t != a && t != b) allowed.push_back(t);
        std::uniform_int_distribution<std::size_t> u(0, allowed.size() - 1);
        return allowed[u(rng)];
    };
    TrialSchedule s;
    s.path.push_back(std::uniform_int_distribution<int>(0, trials - 1)(rng));
    s.path.push_back(pick_except(s.path[0], -1));
    for (int n = 2; n <= n_max; ++n) {
        if (n > 2) s.path.push_back(pick_except(s.path.back(), -1));
        s.path.push_back(pick_except(s.path.back(), -1));
        s.closure.push_back(pick_except(s.path.back(), s.path[0]));
    }
    return s;
}

MomentSequence dp_moments_altT(std::span<const Matrix> trials, int n_max, const TrialSchedule& schedule,
                               const DpOptions& options) {
    check_trials(trials, "dp_moments_altT");
    check_order(n_max, trials[0].rows(), trials[0].cols(), "dp_moments_altT");
    validate_schedule(schedule, static_cast<int>(trials.size()), n_max);
    const auto start = std::chrono::steady_clock::now();
    const Orientation o = resolve_orientation(options.orientation, trials[0].rows(), trials[0].cols());
    const auto work = oriented(trials, o);
    const PathSources src = schedule_sources(work, schedule, n_max);
    const auto sums = increasing_path_sums(work[0].rows(), work[0].cols(), n_max, options.threads,
                                           [&](Eigen::Index) -> const PathSources& { return src; });
    const double first = first_moment(trials[static_cast<std::size_t>(schedule.path[0])],
                                      trials[static_cast<std::size_t>(schedule.path[1])]);
    return assemble(EstimatorKind::DPAltT, trials[0], n_max, first, sums, static_cast<int>(trials.size()), start);
}

MomentSequence dp_moments_altT(std::span<const Matrix> trials, int n_max, std::uint64_t seed,
                               const DpOptions& options) {
    check_trials(trials, "dp_moments_altT");
    check_order(n_max, trials[0].rows(), trials[0].cols(), "dp_moments_altT");
    const auto start = std::chrono::steady_clock::now();
    const int t_count = static_cast<int>(trials.size());
    const Orientation o = resolve_orientation(options.orientation, trials[0].rows(), trials[0].cols());
    const auto work = oriented(trials, o);
    const Eigen::Index anchors = std::max<Eigen::Index>(work[0].rows() - 1, 0);
    std::vector<PathSources> per_anchor;
    per_anchor.reserve(static_cast<std::size_t>(anchors));
    for (Eigen::Index h = 0; h < anchors; ++h)
        per_anchor.push_back(
            schedule_sources(work, random_schedule(t_count, n_max, seed, static_cast<std::uint64_t>(h)), n_max));
    const auto sums = increasing_path_sums(work[0].rows(), work[0].cols(), n_max, options.threads,
                                           [&](Eigen::Index h) -> const PathSources& {
                                               return per_anchor[static_cast<std::size_t>(h)];
                                           });
    // First moment: average over all ordered pairs of distinct trials.
    long double first = 0.0L;
    int pairs = 0;
    for (int a = 0; a < t_count; ++a)
        for (int b = 0; b < t_count; ++b)
            if (a != b) {
                first += first_moment(trials[static_cast<std::size_t>(a)], trials[static_cast<std::size_t>(b)]);
                ++pairs;
            }
    return assemble(EstimatorKind::DPAltT, trials[0], n_max, static_cast<double>(first / pairs), sums, t_count,
                    start);
}

MomentSequence permuted_dp_moments(const Matrix& phi, int n_max, int repeats, std::uint64_t seed,
                                   const DpOptions& options) {
    if (repeats < 1) throw NumericError("permuted_dp_moments: repeats must be >= 1");
    check_order(n_max, phi.rows(), phi.cols(), "permuted_dp_moments");
    if (repeats == 1) return dp_moments(phi, n_max, options);
    const auto start = std::chrono::steady_clock::now();
    std::vector<long double> total(static_cast<std::size_t>(n_max) + 1, 0.0L);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(phi.rows())), cols(static_cast<std::size_t>(phi.cols()));
    Matrix shuffled(phi.rows(), phi.cols());
    for (int r = 0; r < repeats; ++r) {
        std::iota(rows.begin(), rows.end(), 0);
        std::iota(cols.begin(), cols.end(), 0);
        if (r > 0) {
            auto rng = make_stream(seed, StreamDomain::Permutation, static_cast<std::uint64_t>(r));
            std::shuffle(rows.begin(), rows.end(), rng);
            std::shuffle(cols.begin(), cols.end(), rng);
        }
        for (Eigen::Index i = 0; i < phi.rows(); ++i)
            for (Eigen::Index a = 0; a < phi.cols(); ++a)
                shuffled(i, a) = phi(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(a)]);
        const MomentSequence one = dp_moments(shuffled, n_max, options);
        for (int n = 2; n <= n_max; ++n) total[static_cast<std::size_t>(n)] += one.at(n);
    }
    std::vector<double> mean(total.size(), 0.0);
    for (std::size_t n = 0; n < total.size(); ++n) mean[n] = static_cast<double>(total[n] / repeats);
    return assemble(EstimatorKind::DP, phi, n_max, first_moment(phi), mean, 1, start);
}

}  // namespace kernmoment
