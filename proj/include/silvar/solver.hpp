#ifndef SILVAR_SOLVER_HPP
#define SILVAR_SOLVER_HPP

#include "silvar/types.hpp"

namespace silvar::solver {

/// Monotone differentiable links for the fixed-link (GLM) fitting path.
enum class NamedLink { identity, softplus, scaled_logistic, log1pexp };

struct FixedLink {
    NamedLink kind = NamedLink::identity;
    double scale = 1.0;  // the c in softplus(c*x) and 2/(1+exp(-c*x)) - 1

    double operator()(double t) const;
};

/// Link estimate assembled from LMR output: ties in the argument grid are
/// collapsed to one knot (their fitted values agree up to the Dykstra
/// tolerance) and the values are clamped into the monotone 1-Lipschitz cone
/// so the LinkEstimate invariant holds exactly.
LinkEstimate make_link_estimate(const Vector& theta, const Vector& fitted,
                                double lipschitz_bound = 1.0);

struct MarginalGradient {
    Matrix gradient;     // d/dA of min_g F(Y, X, g, A + L); identical for L
    LinkEstimate link;   // LMR link on the realized grid
    Vector fitted;       // fitted values at vec(Theta), original order
    bool lmr_converged = true;
};

/// Marginalized gradient: fits the link to (vec Y, vec Theta) by LMR and
/// returns (1/n) * (Ghat - Y) * X^T where Ghat holds the fitted values.
MarginalGradient marginal_gradient(const Matrix& Y, const Matrix& X,
                                   const Matrix& A_plus_L, const SolverConfig& config);

/// Same gradient with a fixed link in place of the LMR fit.
MarginalGradient fixed_link_gradient(const Matrix& Y, const Matrix& X,
                                     const Matrix& A_plus_L, const FixedLink& link);

/// min over monotone 1-Lipschitz g of the pseudo-likelihood at Theta =
/// (A + L) X, evaluated on the realized grid (cumtrapz + discrete Legendre
/// transform at vec Y).
double marginalized_objective(const Matrix& Y, const Matrix& X,
                              const Matrix& A_plus_L, const SolverConfig& config);

struct FitOutcome {
    Matrix A;
    Matrix L;
    LinkEstimate link;
    FitReport report;
};

/// Accelerated proximal gradient with adaptive momentum restart on
///   F(Y, X, g, A + L) + h1(A) + h2(L),
/// the smooth part marginalized over g through LMR (or evaluated at a fixed
/// link when one is given). Backtracking shrinks the step until the true
/// composite objective does not increase, so the recorded trace is monotone.
/// h2 = none freezes L at zero. `order` is the lag-block count for the
/// group / blockwise penalties (1 outside autoregressive mode).
FitOutcome proximal_fit(const Matrix& Y, const Matrix& X, const RegularizerSpec& reg,
                        const SolverConfig& config, int order = 1);

FitOutcome proximal_fit_glm(const Matrix& Y, const Matrix& X, const FixedLink& link,
                            const RegularizerSpec& reg, const SolverConfig& config,
                            int order = 1);

}  // namespace silvar::solver

#endif
