#include "doctest.h"
#include "helpers.hpp"

#include "kernmoment/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace kernmoment;
using testutil::rel_err;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

Eigen::MatrixXd eye(int d) { return Eigen::MatrixXd::Identity(d, d); }

}  // namespace

TEST_CASE("etas") {
    const auto iso = compute_etas(eye(5), 0.25 * eye(5));
    REQUIRE(iso.size() == 5);
    for (double e : iso) CHECK(e == doctest::Approx(4.0).epsilon(1e-12));

    std::mt19937_64 rng(3);
    const Eigen::MatrixXd s = testutil::random_spd(4, rng);
    for (double e : compute_etas(s, s)) CHECK(e == doctest::Approx(1.0).epsilon(1e-10));

    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd sx = testutil::random_spd(3, rng);
        const Eigen::MatrixXd sg = testutil::random_spd(3, rng);
        const auto etas = compute_etas(sx, sg);
        CHECK(std::is_sorted(etas.rbegin(), etas.rend()));
        Eigen::EigenSolver<Eigen::MatrixXd> es(sx * sg.inverse(), false);
        std::vector<double> ref;
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-10);
            ref.push_back(es.eigenvalues()[i].real());
        }
        std::sort(ref.rbegin(), ref.rend());
        for (int i = 0; i < 3; ++i) CHECK(std::abs(etas[i] - ref[i]) < 1e-10 * std::max(1.0, ref[i]));
    }
    CHECK_THROWS_AS(compute_etas(eye(2), eye(3)), NumericError);
    CHECK_THROWS_AS(compute_etas(eye(2), -eye(2)), NumericError);
}

TEST_CASE("phi scalar") {
    CHECK(phi_scalar(1.0) == doctest::Approx(kGolden).epsilon(1e-14));
    CHECK(phi_scalar(4.0) == doctest::Approx(0.6403882032).epsilon(1e-10));
    CHECK(phi_scalar(1e6) * std::sqrt(1e6) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(phi_scalar(0.0), NumericError);
    CHECK_THROWS_AS(phi_scalar(-2.0), NumericError);
}

TEST_CASE("rbf eigenvalues") {
    const RbfSpectrumSpec one{{1.0}};
    CHECK(rbf_eigenvalue(one, {0}) == doctest::Approx(1.0 / kGolden).epsilon(1e-13));
    for (int u = 0; u < 6; ++u)
        CHECK(rbf_eigenvalue(one, {u}) / rbf_eigenvalue(one, {u + 1}) == doctest::Approx(kGolden * kGolden).epsilon(1e-12));
    CHECK_THROWS_AS(rbf_eigenvalue(one, {0, 1}), NumericError);

    const RbfSpectrumSpec aniso{{3.0, 0.7, 1.4}};
    const double top = rbf_eigenvalue(aniso, {0, 0, 0});
    CHECK(rbf_eigenvalue(aniso, {1, 0, 0}) < top);
    CHECK(rbf_eigenvalue(aniso, {0, 2, 0}) < rbf_eigenvalue(aniso, {0, 1, 0}));

    SUBCASE("d = 1 lattice is geometric") {
        const RbfSpectrumSpec s{{2.5}};
        const auto list = rbf_top_eigenvalues(s, 8);
        const double ratio = list.values[1] / list.values[0];
        for (int i = 1; i < 8; ++i) CHECK(list.values[i] / list.values[i - 1] == doctest::Approx(ratio).epsilon(1e-12));
        CHECK(list.rank == 8);
    }
    SUBCASE("symmetric etas give degenerate pairs") {
        const auto list = rbf_top_eigenvalues(RbfSpectrumSpec{{1.0, 1.0}}, 6);
        CHECK(list.values[1] == doctest::Approx(list.values[2]).epsilon(1e-14));
        CHECK(list.values[0] > list.values[1]);
        // Level t = u1 + u2 has t + 1 members.
        CHECK(list.values[3] == doctest::Approx(list.values[5]).epsilon(1e-14));
    }
    SUBCASE("top list matches a full lattice sort") {
        std::vector<double> all;
        for (int a = 0; a < 25; ++a)
            for (int b = 0; b < 25; ++b)
                for (int c = 0; c < 25; ++c) all.push_back(rbf_eigenvalue(aniso, {a, b, c}));
        std::sort(all.rbegin(), all.rend());
        const auto list = rbf_top_eigenvalues(aniso, 40);
        for (int i = 0; i < 40; ++i) CHECK(list.values[i] == doctest::Approx(all[i]).epsilon(1e-13));
    }
    SUBCASE("partial power sums approach the moment from below") {
        const RbfSpectrumSpec s{{4.0, 4.0, 4.0}};
        const auto list = rbf_top_eigenvalues(s, 3000);
        for (int n = 2; n <= 4; ++n) {
            double prev = 0.0, sum = 0.0;
            for (std::size_t i = 0; i < list.values.size(); ++i) {
                sum += std::pow(list.values[i], n);
                if (i == 99) prev = sum;
            }
            const double m = rbf_moment(s, n);
            CHECK(prev <= sum);
            CHECK(sum <= m * (1 + 1e-12));
            CHECK(rel_err(sum, m) < rel_err(prev, m));
            CHECK(rel_err(sum, m) < 1e-3);
        }
    }
}

TEST_CASE("rbf moments") {
    CHECK(rbf_moment(RbfSpectrumSpec{{1.0}}, 2) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-13));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int t = 0; t < 10; ++t) {
        RbfSpectrumSpec s;
        for (int i = 0; i < 1 + t % 5; ++i) s.etas.push_back(u(rng));
        CHECK(rbf_moment(s, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    const RbfSpectrumSpec iso{{4.0, 4.0, 4.0}};
    CHECK(rel_err(rbf_moment(iso, 2), block_circulant_moment(eye(3), 0.25 * eye(3), 2)) < 1e-8);

    SUBCASE("norm bounds") {
        const RbfSpectrumSpec s{{2.0, 0.5, 5.0}};
        const double top = rbf_eigenvalue(s, {0, 0, 0});
        double prev_root = rbf_moment(s, 1);
        for (int n = 1; n <= 30; ++n) {
            CHECK(rbf_moment(s, n + 1) <= rbf_moment(s, n) * top * (1 + 1e-12));
            const double root = std::pow(rbf_moment(s, n), 1.0 / n);
            CHECK(root <= prev_root * (1 + 1e-12));
            CHECK(root >= top * (1 - 1e-12));
            prev_root = root;
        }
        CHECK(prev_root == doctest::Approx(top).epsilon(0.1));
    }
    const auto seq = rbf_moments(iso, 4);
    CHECK(seq.estimator == EstimatorKind::Analytic);
    CHECK(seq.values.size() == 4);
}

TEST_CASE("block-circulant determinant") {
    CHECK(block_circulant_moment(eye(1), eye(1), 2) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-13));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 4; ++t) {
        const Eigen::MatrixXd sx = testutil::random_spd(3, rng);
        const Eigen::MatrixXd sg = testutil::random_spd(3, rng);
        CHECK(block_circulant_moment(sx, sg, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    Eigen::MatrixXd sx = Eigen::Vector2d(1.0, 2.0).asDiagonal();
    Eigen::MatrixXd sg = Eigen::Vector2d(0.5, 0.25).asDiagonal();
    double expected = 1.0;
    for (double eta : {2.0, 8.0}) {
        const double ph = (1.0 + std::sqrt(1.0 + 4.0 * eta)) / (2.0 * eta);
        expected /= std::pow(eta * ph, 3) - std::pow(ph, -3);
    }
    CHECK(rel_err(block_circulant_moment(sx, sg, 3), expected) < 1e-10);
    CHECK_THROWS_AS(block_circulant_moment(eye(10), eye(10), 201), NumericError);
    CHECK_THROWS_AS(block_circulant_moment(eye(2), eye(2), 0), NumericError);
}

TEST_CASE("linear process moments") {
    const auto m = linear_process_moments(20, 0.3, 3);
    CHECK(m.at(1) == doctest::Approx(6.0));
    CHECK(m.at(2) == doctest::Approx(1.8));
    const auto unit = linear_process_moments(1, 1.0, 5);
    for (int n = 1; n <= 5; ++n) CHECK(unit.at(n) == 1.0);
}
