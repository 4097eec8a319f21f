#include "kernmoment/rng.hpp"

#include "kernmoment/common.hpp"

#include <algorithm>
#include <cmath>

namespace kernmoment {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, StreamDomain domain, std::uint64_t a,
                         std::uint64_t b) {
    std::uint64_t k = splitmix64(seed ^ (static_cast<std::uint64_t>(domain) << 56));
    k = splitmix64(k ^ a);
    return splitmix64(k ^ (b * 0xD1B54A32D192ED03ULL));
}

double binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    // lgamma keeps large arguments finite; exact products for small ones.
    if (n <= 60) {
        double r = 1.0;
        for (std::int64_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
        return std::round(r);
    }
    return std::exp(std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                    std::lgamma(static_cast<double>(n - k) + 1));
}

}  // namespace kernmoment
