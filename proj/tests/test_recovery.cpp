#include "doctest.h"
#include "helpers.hpp"

#include "kernmoment/analytic.hpp"
#include "kernmoment/recovery.hpp"
#include "kernmoment/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace kernmoment;

namespace {

MomentSequence power_sums(const std::vector<double>& lambdas, int k) {
    MomentSequence m;
    m.estimator = EstimatorKind::Analytic;
    m.n_max = k;
    for (int n = 1; n <= k; ++n) {
        double s = 0.0;
        for (double l : lambdas) s += std::pow(l, n);
        m.values[n] = s;
    }
    return m;
}

void check_grid_invariants(const SpectralGrid& g) {
    double total = 0.0;
    for (double w : g.weights) {
        CHECK(w >= -1e-12);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::is_sorted(g.points.begin(), g.points.end()));
    CHECK(g.points.front() > 0.0);
    CHECK(g.points.back() == doctest::Approx(g.b));
}

}  // namespace

TEST_CASE("simplex") {
    // min -x - y  s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4.
    Eigen::MatrixXd a(3, 5);
    a << 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 1, 0, 0, 1;
    const Eigen::Vector3d b(2, 3, 4);
    Eigen::VectorXd c(5);
    c << -1, -2, 0, 0, 0;
    const auto r = simplex_minimize(a, b, c, {2, 3, 4});
    CHECK(r.objective == doctest::Approx(-7.0));
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(3.0));
    CHECK_THROWS_AS(simplex_minimize(a, b, c, {0, 0, 4}), NumericError);
    // min -y  s.t. x - y = 1: y grows without bound.
    Eigen::MatrixXd ray(1, 2);
    ray << 1, -1;
    CHECK_THROWS_AS(simplex_minimize(ray, Eigen::VectorXd::Ones(1), Eigen::Vector2d(0, -1), {0}), NumericError);
}

TEST_CASE("density fit on exact moments") {
    SUBCASE("single eigenvalue on the grid") {
        const auto g = fit_density(power_sums({0.5}, 6), {1, 1.0, 200, 6});
        check_grid_invariants(g);
        CHECK(g.objective == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(g.weights[99] == doctest::Approx(1.0).epsilon(1e-9));
        const auto r = recover(power_sums({0.5}, 6), {1, 1.0, 200, 6});
        REQUIRE(r.eigenvalues.values.size() == 1);
        CHECK(r.eigenvalues.values[0] == doctest::Approx(0.5));
    }
    SUBCASE("zero operator") {
        MomentSequence zero = power_sums({0.0}, 4);
        const auto g = fit_density(zero, {1, 1.0, 100, 4});
        check_grid_invariants(g);
        CHECK(g.weights[0] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("linear process") {
        const auto m = linear_process_moments(20, 0.3, 10);
        const auto g = fit_density(m, {20, 1.0, 200, 10});
        check_grid_invariants(g);
        double near = 0.0;
        for (std::size_t i = 0; i < g.points.size(); ++i)
            if (std::abs(g.points[i] - 0.3) <= 0.05 + 1e-12) near += g.weights[i];
        CHECK(near >= 0.95);
        CHECK(g.objective < 1e-9);
        // Round trip: d * sum p s^n reproduces the moments within the objective.
        double resid = 0.0;
        for (int n = 1; n <= 10; ++n) {
            double s = 0.0;
            for (std::size_t i = 0; i < g.points.size(); ++i) s += g.weights[i] * std::pow(g.points[i], n);
            resid += std::abs(m.at(n) / 20.0 - s);
        }
        CHECK(resid <= g.objective + 1e-9);
    }
    SUBCASE("two separated eigenvalues") {
        const auto m = power_sums({0.8, 0.2}, 6);
        const auto r = recover(m, {2, 1.0, 100, 6});
        CHECK(r.eigenvalues.values[0] == doctest::Approx(0.8));
        CHECK(r.eigenvalues.values[1] == doctest::Approx(0.2));
    }
    SUBCASE("determinism") {
        const auto m = power_sums({0.7, 0.33, 0.1}, 8);
        const auto a = fit_density(m, {3, 1.0, 150, 8});
        const auto b = fit_density(m, {3, 1.0, 150, 8});
        CHECK(a.weights == b.weights);
    }
    SUBCASE("rbf analytic moments") {
        const RbfSpectrumSpec s{{1.0}};
        const auto r = recover(rbf_moments(s, 10), {50, 1.0, 200, 10});
        CHECK(std::is_sorted(r.eigenvalues.values.rbegin(), r.eigenvalues.values.rend()));
        CHECK(r.eigenvalues.values.front() <= 1.0);
        CHECK(r.eigenvalues.values.back() >= 0.0);
    }
}

TEST_CASE("recovery configuration errors") {
    const auto m = linear_process_moments(2, 0.5, 3);
    CHECK_THROWS_AS(fit_density(m, {0, 1.0, 10, 3}), ConfigError);
    CHECK_THROWS_AS(fit_density(m, {5, 1.0, 4, 3}), ConfigError);
    CHECK_THROWS_AS(fit_density(m, {1, 1.0, 10, 0}), ConfigError);
    CHECK_THROWS_AS(fit_density(m, {1, 1.0, 10, 4}), NumericError);
    MomentSequence bad = m;
    bad.values[2] = std::nan("");
    CHECK_THROWS_AS(fit_density(bad, {1, 1.0, 10, 3}), NumericError);
}

TEST_CASE("default upper bound") {
    const auto m = linear_process_moments(20, 0.3, 10);
    // m(n)^{1/n} = 20^{1/n} 0.3 decreases towards 0.3.
    CHECK(default_upper_bound(m, 10) == doctest::Approx(1.2 * std::pow(20.0, 0.1) * 0.3));
    CHECK(default_upper_bound(m, 10) >= 0.3);
    MomentSequence neg;
    neg.values[1] = -1.0;
    CHECK_THROWS_AS(default_upper_bound(neg, 1), NumericError);
    const auto g = fit_density(m, {20, 0.0, 200, 10});
    CHECK(g.b == doctest::Approx(default_upper_bound(m, 10)));
}

TEST_CASE("quantile extraction") {
    SpectralGrid point;
    point.points = {0.25, 0.5, 0.75};
    point.weights = {0.0, 1.0, 0.0};
    point.b = 0.75;
    const auto three = extract_eigenvalues(point, 3);
    CHECK(three.values == std::vector<double>{0.5, 0.5, 0.5});

    SpectralGrid uniform;
    for (int i = 1; i <= 10; ++i) {
        uniform.points.push_back(0.1 * i);
        uniform.weights.push_back(0.1);
    }
    uniform.b = 1.0;
    CHECK(extract_eigenvalues(uniform, 1).values[0] == doctest::Approx(0.5));
    const auto nine = extract_eigenvalues(uniform, 9);
    CHECK(std::is_sorted(nine.values.rbegin(), nine.values.rend()));
    CHECK(nine.values.front() <= 1.0);
    CHECK(nine.values.back() >= 0.0);
}

TEST_CASE("gram eigenvalue baseline") {
    const kernmoment::Matrix phi = testutil::random_matrix(6, 9, 1);
    const auto ev = gram_eigenvalues(phi, 8);
    REQUIRE(ev.values.size() == 8);
    CHECK(ev.rank == 6);
    CHECK(ev.values[7] == 0.0);
    double sum = std::accumulate(ev.values.begin(), ev.values.end(), 0.0);
    CHECK(sum == doctest::Approx(phi.array().square().mean()).epsilon(1e-12));
}
