#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "silvar/isotonic.hpp"

#include <random>

using namespace silvar;
using namespace silvar::isotonic;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

double max_violation(const Vector& fitted, const RegressionInstance& inst) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < inst.sort_permutation.size(); ++j) {
        const double diff =
            fitted(inst.sort_permutation[j + 1]) - fitted(inst.sort_permutation[j]);
        const double gap =
            inst.x(inst.sort_permutation[j + 1]) - inst.x(inst.sort_permutation[j]);
        worst = std::max(worst, -diff);
        worst = std::max(worst, diff - gap);
    }
    return worst;
}

}  // namespace

TEST_CASE("cusum basics") {
    CHECK(cusum(vec({0, 1, 2})) == vec({0, 1, 3}));
    CHECK(cusum(Vector()).size() == 0);
    CHECK(cusum(vec({5})) == vec({5}));
}

TEST_CASE("pav on already monotone data is the identity") {
    const auto inst = make_instance(vec({1, 2, 3}), vec({1, 2, 3}));
    CHECK(pav(inst) == vec({1, 2, 3}));
}

TEST_CASE("pav pools violators to block means") {
    CHECK(pav(make_instance(vec({2, 1}), vec({0, 1}))) == vec({1.5, 1.5}));
    CHECK(pav(make_instance(vec({3, 1, 2}), vec({1, 2, 3}))) == vec({2, 2, 2}));
}

TEST_CASE("pav agrees with the dense QP oracle on random instances") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 30);
        Vector y(n), x(n);
        for (int i = 0; i < n; ++i) {
            y(i) = normal(rng);
            x(i) = static_cast<double>(i);
        }
        const Vector fitted = pav(make_instance(y, x));
        const Vector oracle = oracles::monotone_qp(y);
        CHECK((fitted - oracle).lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("pav is idempotent, nondecreasing, and mean preserving") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 40);
        Vector y(n), x(n);
        for (int i = 0; i < n; ++i) {
            y(i) = normal(rng);
            x(i) = static_cast<double>(i);
        }
        const auto inst = make_instance(y, x);
        const Vector fitted = pav(inst);
        for (int i = 0; i + 1 < n; ++i) CHECK(fitted(i) <= fitted(i + 1));
        CHECK(pav(make_instance(fitted, x)).isApprox(fitted, 1e-14));
        CHECK(fitted.mean() == doctest::Approx(y.mean()).epsilon(1e-12));
        // each maximal run of equal fitted values averages its own targets
        int start = 0;
        for (int i = 1; i <= n; ++i) {
            if (i == n || fitted(i) != fitted(start)) {
                double target_sum = 0.0;
                for (int k = start; k < i; ++k) target_sum += y(k);
                CHECK(fitted(start) ==
                      doctest::Approx(target_sum / (i - start)).epsilon(1e-12));
                start = i;
            }
        }
    }
}

TEST_CASE("gpav with zero gaps reduces to pav") {
    const auto inst = make_instance(vec({3, 1, 2, 5, 4}), vec({0, 1, 2, 3, 4}));
    CHECK(gpav(inst, Vector::Zero(5)) == pav(inst));
}

TEST_CASE("gpav honors binding gap constraints") {
    const auto inst = make_instance(vec({0, 0}), vec({0, 1}));
    CHECK(gpav(inst, vec({0, 1})) == vec({-0.5, 0.5}));
}

TEST_CASE("gpav with slack constraints returns the unconstrained optimum") {
    const auto inst = make_instance(vec({1, 2}), vec({0, 1}));
    CHECK(gpav(inst, vec({0, -3})) == vec({1, 2}));
}

TEST_CASE("gpav equals the shift construction exactly") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 30);
        Vector y(n), x(n), t(n);
        t(0) = 0.0;
        for (int i = 0; i < n; ++i) {
            y(i) = normal(rng);
            x(i) = static_cast<double>(i);
            if (i > 0) t(i) = normal(rng);
        }
        const auto inst = make_instance(y, x);
        const Vector s = cusum(t);
        const Vector via_shift = pav(make_instance(Vector(y - s), x)) + s;
        CHECK((gpav(inst, t) - via_shift).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("lmr passes through feasible input") {
    SolverConfig config;
    const auto out = lmr(vec({0, 0.5, 1}), vec({0, 1, 2}), config);
    CHECK(out.fitted == vec({0, 0.5, 1}));
    CHECK(out.converged);
}

TEST_CASE("lmr frozen examples") {
    SolverConfig config;
    CHECK(lmr(vec({0, 2}), vec({0, 1}), config).fitted.isApprox(vec({0.5, 1.5}), 1e-7));
    CHECK(lmr(vec({1, 0}), vec({0, 1}), config).fitted.isApprox(vec({0.5, 0.5}), 1e-7));
}

TEST_CASE("lmr rejects empty input") {
    SolverConfig config;
    CHECK_THROWS_AS(lmr(Vector(), Vector(), config), std::invalid_argument);
}

TEST_CASE("lmr matches the dense QP oracle and satisfies the constraints") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SolverConfig config;
    config.lmr_max_iters = 2000;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(unif(rng) * 48);
        Vector y(n), x(n);
        double pos = 0.0;
        for (int i = 0; i < n; ++i) {
            pos += unif(rng) * 2.0;
            x(i) = pos;
            y(i) = 2.0 * normal(rng);
        }
        const auto inst = make_instance(y, x);
        const auto out = lmr(inst, config);
        CHECK(max_violation(out.fitted, inst) <= 10.0 * config.dykstra_tolerance);

        Vector xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            xs(i) = x(inst.sort_permutation[i]);
            ys(i) = y(inst.sort_permutation[i]);
        }
        Vector fitted_sorted(n);
        for (int i = 0; i < n; ++i) fitted_sorted(i) = out.fitted(inst.sort_permutation[i]);
        CHECK((fitted_sorted - oracles::lmr_qp(ys, xs)).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("lmr gives duplicated positions a common fitted value") {
    SolverConfig config;
    const auto inst = make_instance(vec({1, 0, 3, 2}), vec({0, 1, 1, 2}));
    const auto out = lmr(inst, config);
    CHECK(std::abs(out.fitted(1) - out.fitted(2)) <= 10.0 * config.dykstra_tolerance);
}

TEST_CASE("lmr handles an all-duplicate grid by fitting the mean") {
    SolverConfig config;
    const auto out = lmr(vec({3, 1, 2}), vec({0, 0, 0}), config);
    CHECK(out.fitted.isApprox(vec({2, 2, 2}), 1e-7));
}

TEST_CASE("lmr works on unsorted positions") {
    SolverConfig config;
    // same data as the [0,2] example, presented out of order
    const auto out = lmr(vec({2, 0}), vec({1, 0}), config);
    CHECK(out.fitted.isApprox(vec({1.5, 0.5}), 1e-7));
}
