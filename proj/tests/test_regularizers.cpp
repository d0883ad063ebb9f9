#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "silvar/regularizers.hpp"

#include <functional>
#include <random>

using namespace silvar;
using namespace silvar::regularizers;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return Matrix::NullaryExpr(r, c, [&](Eigen::Index, Eigen::Index) { return scale * normal(rng); });
}

// prox objective for the optimality checks
double prox_objective(const Matrix& candidate, const Matrix& v, double tau,
                      const std::function<double(const Matrix&)>& penalty) {
    return 0.5 * (candidate - v).squaredNorm() + tau * penalty(candidate);
}

}  // namespace

TEST_CASE("elementwise soft threshold") {
    Matrix v(1, 1);
    v << 2.0;
    CHECK(prox_l1(v, 0.5)(0, 0) == 1.5);
    v << 0.3;
    CHECK(prox_l1(v, 0.5)(0, 0) == 0.0);
    v << -2.0;
    CHECK(prox_l1(v, 0.5)(0, 0) == -1.5);
}

TEST_CASE("group soft threshold across lag blocks") {
    Matrix v(1, 2);  // one entry across two lags
    v << 3.0, 4.0;
    const Matrix out = prox_group_lags(v, 1.0, 2);
    CHECK(out(0, 0) == doctest::Approx(2.4));
    CHECK(out(0, 1) == doctest::Approx(3.2));

    v << 0.3, 0.4;
    CHECK(prox_group_lags(v, 1.0, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("group threshold with one lag equals the elementwise threshold") {
    std::mt19937_64 rng(4);
    const Matrix v = random_matrix(4, 4, rng);
    // same map, different arithmetic: v*(1 - tau/|v|) vs sign(v)*(|v| - tau)
    CHECK((prox_group_lags(v, 0.7, 1) - prox_l1(v, 0.7)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("nuclear prox on a diagonal matrix") {
    Matrix v = Matrix::Zero(2, 2);
    v(0, 0) = 3.0;
    v(1, 1) = 1.0;
    int rank = -1;
    const Matrix out = prox_nuclear(v, 2.0, &rank);
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(out(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rank == 1);
}

TEST_CASE("nuclear prox with zero threshold is the identity") {
    std::mt19937_64 rng(8);
    const Matrix v = random_matrix(3, 5, rng);
    CHECK(prox_nuclear(v, 0.0) == v);
}

TEST_CASE("nuclear prox shrinks a rank-one matrix by the threshold") {
    Vector u(3), w(4);
    u << 1, 2, 2;
    w << 0, 3, 0, 4;
    u.normalize();
    w.normalize();
    const Matrix v = 5.0 * u * w.transpose();
    const Matrix out = prox_nuclear(v, 1.0);
    CHECK((out - 4.0 * u * w.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nuclear ball projection") {
    Matrix v = Matrix::Zero(2, 2);
    v(0, 0) = 3.0;
    v(1, 1) = 1.0;
    const Matrix out = project_nuclear_ball(v, 2.0);
    CHECK(out(0, 0) == doctest::Approx(2.0));
    CHECK(out(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

    Matrix inside = Matrix::Zero(2, 2);
    inside(0, 0) = 0.5;
    inside(1, 1) = 0.5;
    CHECK(project_nuclear_ball(inside, 2.0) == inside);
    CHECK(project_nuclear_ball(Matrix::Zero(3, 3), 1.0) == Matrix::Zero(3, 3));
}

TEST_CASE("singular value simplex projection matches the brute-force oracle") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + static_cast<int>(unif(rng) * 6);
        Vector s(k);
        for (int i = 0; i < k; ++i) s(i) = 3.0 * unif(rng);
        std::sort(s.data(), s.data() + k, std::greater<double>());
        Matrix v = Matrix::Zero(k, k);
        v.diagonal() = s;
        const double radius = 0.2 + 2.0 * unif(rng);
        const Matrix projected = project_nuclear_ball(v, radius);
        const Vector expect = oracles::simplex_projection_brute(s, std::min(radius, s.sum()));
        if (s.sum() <= radius) {
            CHECK((projected - v).cwiseAbs().maxCoeff() == 0.0);
        } else {
            CHECK((Vector(projected.diagonal()) - expect).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("prox outputs beat random feasible perturbations") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double tau = 0.6;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix v = random_matrix(5, 6, rng);

        struct Case {
            Matrix argmin;
            std::function<double(const Matrix&)> penalty;
        };
        std::vector<Case> cases;
        cases.push_back({prox_l1(v, tau), [](const Matrix& a) { return l1_value(a); }});
        cases.push_back({prox_group_lags(v, tau, 2),
                         [](const Matrix& a) { return group_lags_value(a, 2); }});
        cases.push_back({prox_nuclear(v, tau), [](const Matrix& a) { return nuclear_value(a); }});

        for (const auto& c : cases) {
            const double base = prox_objective(c.argmin, v, tau, c.penalty);
            for (int k = 0; k < 200; ++k) {
                const Matrix perturbed = c.argmin + 0.05 * random_matrix(5, 6, rng);
                CHECK(prox_objective(perturbed, v, tau, c.penalty) >= base - 1e-9);
            }
        }

        // ball projection: perturbations must stay feasible
        const double radius = 1.5;
        const Matrix projected = project_nuclear_ball(v, radius);
        const double base = 0.5 * (projected - v).squaredNorm();
        for (int k = 0; k < 200; ++k) {
            const Matrix candidate =
                project_nuclear_ball(projected + 0.05 * random_matrix(5, 6, rng), radius);
            CHECK(0.5 * (candidate - v).squaredNorm() >= base - 1e-9);
        }
    }
}

TEST_CASE("prox operators do not increase the nuclear norm or leave the ball") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix v = random_matrix(4, 5, rng);
        CHECK(nuclear_value(prox_nuclear(v, 0.3)) <= nuclear_value(v) + 1e-12);
        CHECK(nuclear_value(project_nuclear_ball(v, 1.2)) <= 1.2 + 1e-9);
    }
}

TEST_CASE("prox operators are non-expansive") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(4, 6, rng);
        const Matrix b = random_matrix(4, 6, rng);
        const double dist = (a - b).norm();
        CHECK((prox_l1(a, 0.4) - prox_l1(b, 0.4)).norm() <= dist + 1e-12);
        CHECK((prox_group_lags(a, 0.4, 3) - prox_group_lags(b, 0.4, 3)).norm() <= dist + 1e-12);
        CHECK((prox_nuclear(a, 0.4) - prox_nuclear(b, 0.4)).norm() <= dist + 1e-10);
        CHECK((project_nuclear_ball(a, 1.0) - project_nuclear_ball(b, 1.0)).norm() <=
              dist + 1e-10);
    }
}

TEST_CASE("blockwise nuclear prox treats each lag block independently") {
    std::mt19937_64 rng(41);
    const Matrix v = random_matrix(3, 6, rng);
    const Matrix out = prox_nuclear_blocks(v, 0.5, 2);
    CHECK((out.leftCols(3) - prox_nuclear(v.leftCols(3), 0.5)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((out.rightCols(3) - prox_nuclear(v.rightCols(3), 0.5)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(prox_nuclear_blocks(v, 0.5, 4), std::invalid_argument);
}

TEST_CASE("regularizer dispatch respects the disabled latent part") {
    std::mt19937_64 rng(43);
    const Matrix L = random_matrix(3, 3, rng);
    RegularizerSpec reg;
    reg.h2_kind = H2Kind::none;
    reg.lambda_l = 5.0;
    CHECK(apply_h2_prox(L, reg, 0.1, 1) == Matrix::Zero(3, 3));
    CHECK(h2_value(L, reg, 1) == 0.0);
}
