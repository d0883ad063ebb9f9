#include "silvar/synth.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace silvar::synth {

double eval_link_kind(LinkKind kind, double c, double t) {
    switch (kind) {
        case LinkKind::g1_softplus: {
            const double a = c * t;
            return a > 30.0 ? a : std::log1p(std::exp(a));
        }
        case LinkKind::g2_scaled_logistic:
            return 2.0 / (1.0 + std::exp(-c * t)) - 1.0;
        case LinkKind::identity:
            return t;
    }
    return t;
}

namespace {

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
    }
    return M;
}

}  // namespace

SynthTruth generate_multitask(const SynthSpec& spec) {
    if (spec.m <= 0 || spec.p <= 0 || spec.n <= 0) {
        throw std::invalid_argument("synth: dimensions must be positive");
    }
    if (spec.h < 0.0 || spec.h >= 1.0) {
        throw std::invalid_argument("synth: hidden fraction must lie in [0, 1)");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(spec.seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const int H = static_cast<int>(std::floor(spec.h * spec.p));
    const Eigen::Index m = spec.m, p = spec.p, n = spec.n;

    // dense normal A_f = (A  B), then sparsify A and rescale B
    Matrix A_f = standard_normal(m, p + H, rng);

    const auto target = static_cast<std::size_t>(
        std::floor(static_cast<double>(m) * std::log10(static_cast<double>(p))));
    std::vector<Eigen::Index> positions(static_cast<std::size_t>(m * p));
    std::iota(positions.begin(), positions.end(), Eigen::Index{0});
    // Fisher-Yates prefix: choose the surviving entries uniformly
    for (std::size_t i = 0; i < target && i + 1 < positions.size(); ++i) {
        const auto j = i + static_cast<std::size_t>(unif(rng) * static_cast<double>(positions.size() - i));
        std::swap(positions[i], positions[std::min(j, positions.size() - 1)]);
    }
    Matrix mask = Matrix::Zero(m, p);
    for (std::size_t i = 0; i < target; ++i) {
        mask(positions[i] % m, positions[i] / m) = 1.0;
    }
    A_f.leftCols(p).array() *= mask.array();
    if (H > 0) A_f.rightCols(H) *= 1.0 / (3.0 * std::sqrt(static_cast<double>(H)));

    // covariance square root: unit diagonal, thresholded uniform off-diagonals
    Matrix Sigma_half(p + H, p + H);
    for (Eigen::Index j = 0; j < p + H; ++j) {
        for (Eigen::Index i = 0; i < p + H; ++i) {
            if (i == j) {
                Sigma_half(i, j) = 1.0;
            } else {
                const double u = unif(rng) - 0.5;
                Sigma_half(i, j) = std::abs(u) > 0.35 ? u : 0.0;
            }
        }
    }

    const Matrix X_f = Sigma_half * standard_normal(p + H, n, rng);
    Matrix Y = A_f * X_f;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            Y(i, j) = eval_link_kind(spec.link_kind, spec.c, Y(i, j));
        }
    }
    Y += spec.noise_sigma * standard_normal(m, n, rng);

    SynthTruth truth;
    truth.A_true = A_f.leftCols(p);
    truth.B_true = A_f.rightCols(H);
    truth.Sigma_half = std::move(Sigma_half);
    truth.X = X_f.topRows(p);
    truth.Z = X_f.bottomRows(H);
    truth.Y = std::move(Y);
    return truth;
}

namespace {

double companion_spectral_radius(const Matrix& A_blocks, Eigen::Index N, int M) {
    Matrix companion = Matrix::Zero(N * M, N * M);
    companion.topRows(N) = A_blocks;
    for (int i = 1; i < M; ++i) {
        companion.block(i * N, (i - 1) * N, N, N).setIdentity();
    }
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ArSynthTruth generate_ar_with_trend(const ArSynthSpec& spec) {
    if (spec.N <= 0 || spec.order <= 0 || spec.K <= 2 * spec.order) {
        throw std::invalid_argument("ar synth: need K > 2*order and positive sizes");
    }
    if (spec.spectral_radius <= 0.0 || spec.spectral_radius >= 0.9) {
        throw std::invalid_argument("ar synth: spectral radius must lie in (0, 0.9)");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(spec.seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const Eigen::Index N = spec.N;
    const int M = spec.order;

    Matrix A_blocks;
    bool stable = false;
    for (int attempt = 0; attempt < 10 && !stable; ++attempt) {
        // random-sign entries bounded away from zero keep the surviving
        // groups comparably strong after the spectral rescaling
        A_blocks.setZero(N, N * M);
        for (Eigen::Index j = 0; j < A_blocks.cols(); ++j) {
            for (Eigen::Index i = 0; i < A_blocks.rows(); ++i) {
                const double keep = unif(rng);
                const double magnitude = 0.5 + 0.5 * unif(rng);
                const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
                if (keep <= spec.density) A_blocks(i, j) = sign * magnitude;
            }
        }
        const double radius = companion_spectral_radius(A_blocks, N, M);
        if (radius > 0.0) {
            A_blocks *= spec.spectral_radius / radius;
            stable = companion_spectral_radius(A_blocks, N, M) < 0.9;
        }
    }
    if (!stable) throw std::runtime_error("ar synth: could not build a stable lag polynomial");

    const int burn = 5 * M;
    const Eigen::Index total = spec.K + burn;

    // shared sinusoid time profile with per-series amplitudes
    Matrix trend = Matrix::Zero(N, total);
    if (spec.trend_kind == TrendKind::sinusoid) {
        Vector amplitude(N);
        Vector phase(N);
        const double common_phase = 2.0 * M_PI * unif(rng);
        for (Eigen::Index i = 0; i < N; ++i) {
            amplitude(i) = spec.trend_amplitude * (0.5 + unif(rng));
            phase(i) = common_phase;
        }
        for (Eigen::Index k = 0; k < total; ++k) {
            const double angle =
                2.0 * M_PI * spec.trend_cycles * static_cast<double>(k) / static_cast<double>(spec.K);
            for (Eigen::Index i = 0; i < N; ++i) {
                trend(i, k) = amplitude(i) * std::sin(angle + phase(i));
            }
        }
    }

    Matrix series(N, total);
    for (int k = 0; k < M; ++k) {
        series.col(k) = trend.col(k) + spec.noise_sigma * standard_normal(N, 1, rng);
    }
    for (Eigen::Index k = M; k < total; ++k) {
        Vector drive = trend.col(k);
        for (int lag = 1; lag <= M; ++lag) {
            drive.noalias() +=
                A_blocks.middleCols((lag - 1) * N, N) * (series.col(k - lag) - trend.col(k - lag));
        }
        for (Eigen::Index i = 0; i < N; ++i) {
            series(i, k) = eval_link_kind(spec.link_kind, spec.c, drive(i));
        }
        series.col(k) += spec.noise_sigma * standard_normal(N, 1, rng);
    }

    ArSynthTruth truth;
    truth.series = series.rightCols(spec.K);
    truth.trend = trend.rightCols(spec.K);
    truth.A_blocks = A_blocks;

    // implied latent blocks: least squares on sum_i L^(i) x_{k-i} = c_k with
    // c_k = l'_k - sum_i A^(i) l'_{k-i}
    {
        const Eigen::Index K = spec.K;
        Matrix design(N * M, K - M);   // stacked lags
        Matrix target(N, K - M);
        for (Eigen::Index j = 0; j < K - M; ++j) {
            const Eigen::Index k = j + M;
            for (int lag = 1; lag <= M; ++lag) {
                design.block((lag - 1) * N, j, N, 1) = truth.series.col(k - lag);
            }
            Vector c = truth.trend.col(k);
            for (int lag = 1; lag <= M; ++lag) {
                c.noalias() -= A_blocks.middleCols((lag - 1) * N, N) * truth.trend.col(k - lag);
            }
            target.col(j) = c;
        }
        // L = target * design^T (design design^T)^-1, row-wise least squares
        const Matrix gram = design * design.transpose();
        truth.L_blocks =
            gram.ldlt().solve(design * target.transpose()).transpose();
    }
    return truth;
}

}  // namespace silvar::synth
