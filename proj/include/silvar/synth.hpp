#ifndef SILVAR_SYNTH_HPP
#define SILVAR_SYNTH_HPP

#include "silvar/types.hpp"

namespace silvar::synth {

enum class LinkKind { g1_softplus, g2_scaled_logistic, identity };

double eval_link_kind(LinkKind kind, double c, double t);

/// Multitask generator: sparse A with floor(m*log10(p)) nonzeros total,
/// hidden block B = A's last H columns scaled by 1/(3*sqrt(H)), correlated
/// design X_f = Sigma_half * R with R standard normal, and
/// Y = g(A_f X_f) + sigma * W. Deterministic given the seed.
struct SynthSpec {
    int m = 25;
    int p = 25;
    double h = 0.0;  // hidden fraction, H = floor(h*p)
    int n = 100;
    LinkKind link_kind = LinkKind::g1_softplus;
    double c = 1.0;
    double noise_sigma = 0.1;
    long seed = 0;
};

struct SynthTruth {
    Matrix A_true;     // m x p
    Matrix B_true;     // m x H
    Matrix Sigma_half; // (p+H) x (p+H)
    Matrix X;          // p x n (observed block)
    Matrix Z;          // H x n (hidden block)
    Matrix Y;          // m x n
};

SynthTruth generate_multitask(const SynthSpec& spec);

enum class TrendKind { none, sinusoid };

struct ArSynthSpec {
    int N = 10;
    int K = 365;
    int order = 2;
    TrendKind trend_kind = TrendKind::sinusoid;
    LinkKind link_kind = LinkKind::identity;
    double c = 1.0;
    double trend_amplitude = 10.0;
    double trend_cycles = 1.0;
    double noise_sigma = 1.0;
    double spectral_radius = 0.5;  // companion-matrix scale, must stay < 0.9
    double density = 0.3;          // nonzero fraction of each planted lag block
    long seed = 0;
};

struct ArSynthTruth {
    Matrix series;   // N x K
    Matrix A_blocks; // N x (N*order), planted lag matrices
    Matrix L_blocks; // N x (N*order), least-squares-implied latent blocks
    Matrix trend;    // N x K planted trend (zero when trend_kind = none)
};

/// Simulates x_k = g(l'_k + sum_i A^(i) (x_{k-i} - l'_{k-i})) + noise forward
/// from random initial conditions, discarding a 5*order burn-in. The implied
/// L blocks solve min_L sum_k || sum_i L^(i) x_{k-i} - (l'_k - sum_i A^(i)
/// l'_{k-i}) ||^2 on the generated series. Regenerates up to 10 times if the
/// scaled companion matrix is unstable.
ArSynthTruth generate_ar_with_trend(const ArSynthSpec& spec);

}  // namespace silvar::synth

#endif
