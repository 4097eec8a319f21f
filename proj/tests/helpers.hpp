#pragma once

#include "kernmoment/common.hpp"

#include <cmath>
#include <random>

namespace testutil {

inline kernmoment::Matrix random_matrix(Eigen::Index p, Eigen::Index q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    kernmoment::Matrix m(p, q);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

inline kernmoment::Matrix small_example() {
    kernmoment::Matrix m(2, 2);
    m << 1, 2, 3, 4;
    return m;
}

inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng, double floor = 0.2) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d * d; ++i) a.data()[i] = normal(rng);
    return a * a.transpose() / d + floor * Eigen::MatrixXd::Identity(d, d);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil
