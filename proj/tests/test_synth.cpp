#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "silvar/synth.hpp"

#include <cmath>

using namespace silvar;
using namespace silvar::synth;

TEST_CASE("masked A carries exactly floor(m log10 p) nonzeros") {
    SynthSpec spec;
    spec.m = 25;
    spec.p = 25;
    spec.n = 10;
    spec.h = 0.1;
    spec.seed = 3;
    const SynthTruth truth = generate_multitask(spec);
    CHECK((truth.A_true.array() != 0.0).count() == 34);

    spec.m = 20;
    spec.p = 20;
    spec.seed = 4;
    CHECK((generate_multitask(spec).A_true.array() != 0.0).count() ==
          static_cast<Eigen::Index>(std::floor(20 * std::log10(20.0))));
}

TEST_CASE("no hidden block when h = 0") {
    SynthSpec spec;
    spec.m = 6;
    spec.p = 9;
    spec.n = 12;
    spec.h = 0.0;
    const SynthTruth truth = generate_multitask(spec);
    CHECK(truth.Z.rows() == 0);
    CHECK(truth.B_true.cols() == 0);
    CHECK(truth.X.rows() == 9);
    CHECK(truth.Y.cols() == 12);
}

TEST_CASE("generation is deterministic in the seed") {
    SynthSpec spec;
    spec.m = 5;
    spec.p = 8;
    spec.n = 20;
    spec.h = 0.25;
    spec.seed = 77;
    const SynthTruth a = generate_multitask(spec);
    const SynthTruth b = generate_multitask(spec);
    CHECK(a.Y == b.Y);
    CHECK(a.X == b.X);
    CHECK(a.A_true == b.A_true);
    spec.seed = 78;
    CHECK(generate_multitask(spec).Y != a.Y);
}

TEST_CASE("hidden block is scaled by 1/(3 sqrt(H))") {
    SynthSpec spec;
    spec.m = 10;
    spec.p = 20;
    spec.n = 5;
    spec.h = 0.25;  // H = 5
    spec.seed = 11;
    const SynthTruth truth = generate_multitask(spec);
    REQUIRE(truth.B_true.cols() == 5);
    // raw entries are standard normal; after scaling the sample second moment
    // sits near 1/(9 H)
    const double ms = truth.B_true.array().square().mean();
    CHECK(ms == doctest::Approx(1.0 / 45.0).epsilon(0.5));
}

TEST_CASE("sample covariance approaches Sigma_half Sigma_half^T") {
    SynthSpec spec;
    spec.m = 4;
    spec.p = 10;
    spec.h = 0.2;
    spec.n = 5000;
    spec.seed = 9;
    const SynthTruth truth = generate_multitask(spec);
    Matrix Xf(truth.X.rows() + truth.Z.rows(), truth.X.cols());
    Xf << truth.X, truth.Z;
    const Matrix sample_cov = Xf * Xf.transpose() / 5000.0;
    const Matrix target = truth.Sigma_half * truth.Sigma_half.transpose();
    CHECK((sample_cov - target).norm() / target.norm() < 0.2);
}

TEST_CASE("link kinds match their closed forms") {
    for (double t : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
        for (double c : {0.5, 1.0, 2.0}) {
            CHECK(eval_link_kind(LinkKind::g1_softplus, c, t) ==
                  doctest::Approx(std::log(1.0 + std::exp(c * t))).epsilon(1e-12));
            CHECK(eval_link_kind(LinkKind::g2_scaled_logistic, c, t) ==
                  doctest::Approx(2.0 / (1.0 + std::exp(-c * t)) - 1.0).epsilon(1e-12));
        }
        CHECK(eval_link_kind(LinkKind::identity, 1.0, t) == t);
    }
}

TEST_CASE("ar generator without trend produces a stable series") {
    ArSynthSpec spec;
    spec.N = 4;
    spec.K = 300;
    spec.order = 2;
    spec.trend_kind = TrendKind::none;
    spec.noise_sigma = 1.0;
    spec.seed = 5;
    const ArSynthTruth truth = generate_ar_with_trend(spec);
    CHECK(truth.series.rows() == 4);
    CHECK(truth.series.cols() == 300);
    CHECK(truth.trend.cwiseAbs().maxCoeff() == 0.0);
    CHECK(truth.series.cwiseAbs().maxCoeff() < 100.0);  // no blow-up
    CHECK(truth.A_blocks.cols() == 8);

    const ArSynthTruth again = generate_ar_with_trend(spec);
    CHECK(again.series == truth.series);
}

TEST_CASE("ar generator with a sinusoid trend is trend-dominated") {
    ArSynthSpec spec;
    spec.N = 6;
    spec.K = 365;
    spec.order = 2;
    spec.trend_kind = TrendKind::sinusoid;
    spec.trend_amplitude = 10.0;
    spec.noise_sigma = 1.0;
    spec.seed = 8;
    const ArSynthTruth truth = generate_ar_with_trend(spec);
    // the trend carries most of the series energy
    CHECK(truth.trend.norm() > 2.0 * (truth.series - truth.trend).norm());
    // implied latent blocks reproduce the trend equation reasonably well
    const Eigen::Index N = 6;
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 2; k < 365; ++k) {
        Vector lhs = Vector::Zero(N);
        for (int lag = 1; lag <= 2; ++lag) {
            lhs += truth.L_blocks.middleCols((lag - 1) * N, N) * truth.series.col(k - lag);
        }
        Vector rhs = truth.trend.col(k);
        for (int lag = 1; lag <= 2; ++lag) {
            rhs -= truth.A_blocks.middleCols((lag - 1) * N, N) * truth.trend.col(k - lag);
        }
        num += (lhs - rhs).squaredNorm();
        den += rhs.squaredNorm();
    }
    CHECK(num / den < 0.05);
}
