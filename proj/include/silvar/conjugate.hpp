#ifndef SILVAR_CONJUGATE_HPP
#define SILVAR_CONJUGATE_HPP

#include "silvar/types.hpp"

namespace silvar::conjugate {

/// Cumulative integral of the link and the domain its conjugate was built
/// over. G_values is anchored at zero and is discretely convex because the
/// link values are nondecreasing.
struct IntegratedLink {
    Vector knots;
    Vector G_values;
    double conjugate_domain_lo = 0.0;  // min of the link values
    double conjugate_domain_hi = 0.0;  // max of the link values
};

/// Cumulative trapezoid integral anchored at G[0] = 0.
/// Throws std::invalid_argument on unsorted knots or length mismatch.
Vector cumtrapz(const Vector& knots, const Vector& values);

IntegratedLink integrate_link(const LinkEstimate& link);

/// Discrete Legendre transform: Gstar[j] = max_i (knots[i]*y[j] - G[i]).
/// Queries are sorted once and swept with a monotone argmax pointer over the
/// lower convex hull of (knots, G), so the result equals the brute-force max
/// for arbitrary G. Always finite.
Vector dlt(const Vector& knots, const Vector& G, const Vector& query);

/// Exact conjugate of the piecewise-linear link extended by unit-slope tails:
/// the supremum is attained where the extended link crosses the query, so
/// every query is finite and there is no grid truncation. Used by the solver
/// so objective values are comparable across argument grids.
double unit_tail_conjugate(const IntegratedLink& integral, const LinkEstimate& link, double y);

/// Pseudo-likelihood with the unit-tail conjugate in place of the grid DLT.
double objective_unit_tails(const Matrix& Y, const Matrix& Theta, const LinkEstimate& link);

/// G at an arbitrary point: quadratic (trapezoid-consistent) interpolation
/// inside the knot range, quadratic continuation with the boundary link slope
/// outside. Exact at knots.
double eval_integral(const IntegratedLink& integral, const LinkEstimate& link, double t);

/// Piecewise-linear link evaluation; outside the knots, linear extrapolation
/// with the adjacent boundary slope (slope 0 for single-knot links).
double eval_link(const LinkEstimate& link, double t);

Matrix eval_link(const LinkEstimate& link, const Matrix& T);

/// Pseudo-likelihood value (1/n) * sum_ij [Gstar(y_ij) + G(theta_ij)
/// - y_ij * theta_ij] from an explicit integrated link; n is Y's column
/// count. Adding a constant to G_values leaves the result unchanged.
double objective_from_integral(const Matrix& Y, const Matrix& Theta,
                               const IntegratedLink& integral, const LinkEstimate& link);

double objective_value(const Matrix& Y, const Matrix& Theta, const LinkEstimate& link);

}  // namespace silvar::conjugate

#endif
