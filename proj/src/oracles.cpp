#include "kernmoment/estimators.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace kernmoment {

namespace {

// Advances `idx` to the next strictly increasing k-subset of [0, n). Returns false when exhausted.
bool next_combination(std::vector<Eigen::Index>& idx, Eigen::Index n) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index i = k - 1; i >= 0; --i) {
        if (idx[static_cast<std::size_t>(i)] < n - k + i) {
            ++idx[static_cast<std::size_t>(i)];
            for (Eigen::Index j = i + 1; j < k; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

std::vector<std::vector<Eigen::Index>> combinations(Eigen::Index n, int k) {
    std::vector<std::vector<Eigen::Index>> out;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    do out.push_back(idx);
    while (next_combination(idx, n));
    return out;
}

std::vector<std::vector<Eigen::Index>> arrangements(Eigen::Index n, int k) {
    std::vector<std::vector<Eigen::Index>> out;
    for (auto c : combinations(n, k)) {
        do out.push_back(c);
        while (std::next_permutation(c.begin(), c.end()));
    }
    return out;
}

// Phi(i1,a1) Phi(i2,a1) Phi(i2,a2) ... Phi(in,an) Phi(i1,an)
long double cycle_product(const Matrix& phi, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
    const std::size_t n = rows.size();
    long double prod = 1.0L;
    for (std::size_t k = 0; k < n; ++k) {
        prod *= phi(rows[k], cols[k]);
        prod *= phi(rows[(k + 1) % n], cols[k]);
    }
    return prod;
}

void check_budget(double count, const char* who) {
    if (!(count <= kBruteForceBudget))
        throw NumericError(std::string(who) + ": " + std::to_string(count) + " tuples exceed the enumeration budget");
}

long double average_over(const Matrix& phi, const std::vector<std::vector<Eigen::Index>>& rows,
                         const std::vector<std::vector<Eigen::Index>>& cols) {
    long double total = 0.0L;
    for (const auto& r : rows)
        for (const auto& c : cols) total += cycle_product(phi, r, c);
    return total / (static_cast<long double>(rows.size()) * static_cast<long double>(cols.size()));
}

void check_order(const Matrix& phi, int n, const char* who) {
    if (n < 1 || n > std::min(phi.rows(), phi.cols()))
        throw NumericError(std::string(who) + ": order " + std::to_string(n) + " outside [1, min(P, Q)]");
}

}  // namespace

double brute_force_increasing(const Matrix& phi, int n) {
    check_order(phi, n, "brute_force_increasing");
    check_budget(binomial(phi.rows(), n) * binomial(phi.cols(), n), "brute_force_increasing");
    return static_cast<double>(average_over(phi, combinations(phi.rows(), n), combinations(phi.cols(), n)));
}

double brute_force_all_paths(const Matrix& phi, int n) {
    check_order(phi, n, "brute_force_all_paths");
    double count = 1.0;
    for (int i = 0; i < n; ++i)
        count *= static_cast<double>(phi.rows() - i) * static_cast<double>(phi.cols() - i);
    check_budget(count, "brute_force_all_paths");
    return static_cast<double>(average_over(phi, arrangements(phi.rows(), n), arrangements(phi.cols(), n)));
}

}  // namespace kernmoment
