#ifndef SILVAR_ISOTONIC_HPP
#define SILVAR_ISOTONIC_HPP

#include "silvar/types.hpp"

namespace silvar::isotonic {

/// Targets y observed at index positions x, together with the stable sort
/// permutation that orders x ascending.
struct RegressionInstance {
    Vector y;
    Vector x;
    std::vector<Eigen::Index> sort_permutation;
};

/// Builds the instance, computing a stable ascending sort of x.
/// Throws std::invalid_argument on empty or mismatched input.
RegressionInstance make_instance(const Vector& y, const Vector& x);

/// Running sum: s_i = sum_{j<=i} t_j.
Vector cusum(const Vector& t);

/// Least-squares monotone (nondecreasing) regression via a single
/// pooled-adjacent-violators sweep over a stack of (value, weight) blocks.
/// Input and output are in sorted order.
Vector pav_sorted(const Vector& y_sorted);

/// PAV in original index order: minimizes sum (g_i - y_i)^2 subject to g
/// nondecreasing along x.
Vector pav(const RegressionInstance& inst);

/// Generalized PAV with per-gap lower bounds t (sorted order, t[0] = 0):
/// minimizes sum (g_i - y_i)^2 s.t. g_[j+1] - g_[j] >= t_[j+1]. Computed by
/// the shift identity gpav(y, x, t) = pav(y - cusum(t), x) + cusum(t).
Vector gpav(const RegressionInstance& inst, const Vector& t);

struct LmrResult {
    Vector fitted;  // original index order
    bool converged = true;
    int iterations = 0;
};

/// Lipschitz monotone regression: projects y onto
///   { g : 0 <= g_[j+1] - g_[j] <= x_[j+1] - x_[j] }
/// by accelerated Dykstra alternating projections, the lower (monotone) set
/// handled by PAV and the upper (slope-bound) set by PAV on the negated,
/// cusum-shifted sequence. Stops when the accelerated iterate moves less
/// than config.dykstra_tolerance; non-convergence is reported via the flag.
LmrResult lmr(const RegressionInstance& inst, const SolverConfig& config);

LmrResult lmr(const Vector& y, const Vector& x, const SolverConfig& config);

}  // namespace silvar::isotonic

#endif
