#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace kernmoment {

enum class EstimatorKind {
    Naive,
    KVRow,
    KVCol,
    ExactN2,
    DP,
    DPAlt2,
    DPAltT,
    BruteForceIncreasing,
    BruteForceAllPaths,
    Analytic,
};

/// Stable lower-case tag used in CSV/JSON ("naive", "kv-row", "dp", ...).
std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& tag);

struct MomentMeta {
    std::int64_t p = 0;
    std::int64_t q = 0;
    std::uint64_t seed = 0;
    int trials = 1;
};

/// Values m(n) for n = 1..n_max (ExactN2 carries only n = 1, 2).
struct MomentSequence {
    EstimatorKind estimator = EstimatorKind::DP;
    int n_max = 0;
    std::map<int, double> values;
    MomentMeta meta;
    double wall_seconds = 0.0;

    double at(int n) const;
    bool has(int n) const { return values.count(n) != 0; }
};

}  // namespace kernmoment
