#include "kernmoment/estimators.hpp"
#include "kernmoment/rng.hpp"

#include <cmath>

namespace kernmoment {

double variance_bound(int n, std::int64_t p, std::int64_t q, double f_n, bool f_is_raw_variance) {
    if (!(f_n >= 0.0)) throw NumericError("variance_bound: f_n must be nonnegative");
    if (p < 1 || q < 1) throw NumericError("variance_bound: P and Q must be positive");
    const double f = f_is_raw_variance ? static_cast<double>(n) * n * f_n : f_n;
    return (1.0 / static_cast<double>(p) + 1.0 / static_cast<double>(q)) * f;
}

double estimate_f(const GenerativeProcess& process, int n, std::int64_t samples, std::uint64_t seed) {
    if (n < 1) throw NumericError("estimate_f: n must be >= 1");
    if (samples < 2) throw NumericError("estimate_f: at least two samples are required");
    // Welford running variance of the cyclic product.
    long double mean = 0.0L;
    long double m2 = 0.0L;
    for (std::int64_t s = 0; s < samples; ++s) {
        const std::uint64_t key = stream_key(seed, StreamDomain::FTuples, static_cast<std::uint64_t>(s));
        const Matrix x = sample_inputs(process, n, key);
        const FeatureSet w = sample_features(process, n, key);
        long double prod = 1.0L;
        for (int i = 0; i < n; ++i) {
            const double phase = w.phases.size() > 0 ? w.phases[i] : 0.0;
            const Vector wi = w.weights.row(i).transpose();
            prod *= evaluate_phi(process, x.row(i).transpose(), wi, phase);
            prod *= evaluate_phi(process, x.row((i + 1) % n).transpose(), wi, phase);
        }
        const long double delta = prod - mean;
        mean += delta / static_cast<long double>(s + 1);
        m2 += delta * (prod - mean);
    }
    const long double var = m2 / static_cast<long double>(samples - 1);
    return static_cast<double>(static_cast<long double>(n) * n * var);
}

double chebyshev_error(int n, std::int64_t p, std::int64_t q, double f_n, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw NumericError("chebyshev_error: delta must lie in (0, 1)");
    return std::sqrt(variance_bound(n, p, q, f_n) / delta);
}

}  // namespace kernmoment
