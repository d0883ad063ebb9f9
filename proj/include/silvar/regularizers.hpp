#ifndef SILVAR_REGULARIZERS_HPP
#define SILVAR_REGULARIZERS_HPP

#include "silvar/types.hpp"

namespace silvar::regularizers {

/// Elementwise soft threshold sign(v) * max(|v| - tau, 0).
Matrix prox_l1(const Matrix& v, double tau);

/// Block soft threshold across lag blocks: for each entry (i, j) of an
/// N x (N*M) matrix the group is (a^(1)_ij, ..., a^(M)_ij) and each group is
/// scaled by max(1 - tau / ||group||_2, 0).
Matrix prox_group_lags(const Matrix& v, double tau, int order);

/// Singular value soft threshold; rank_out (optional) receives the number of
/// singular values that survive.
Matrix prox_nuclear(const Matrix& v, double tau, int* rank_out = nullptr);

/// Per-lag-block singular value soft threshold (h2 applied blockwise in
/// autoregressive mode).
Matrix prox_nuclear_blocks(const Matrix& v, double tau, int order);

/// Projection onto { V : ||V||_* <= radius } via simplex projection of the
/// singular values (sorted-threshold rule).
Matrix project_nuclear_ball(const Matrix& v, double radius);

Matrix project_nuclear_ball_blocks(const Matrix& v, double radius, int order);

double l1_value(const Matrix& v);
double group_lags_value(const Matrix& v, int order);
double nuclear_value(const Matrix& v);
double nuclear_blocks_value(const Matrix& v, int order);

/// Penalty h1 / h2 values and prox steps dispatched on a RegularizerSpec.
/// h2 = none means L is pinned to zero and contributes nothing.
double h1_value(const Matrix& A, const RegularizerSpec& reg, int order);
double h2_value(const Matrix& L, const RegularizerSpec& reg, int order);
Matrix apply_h1_prox(const Matrix& A, const RegularizerSpec& reg, double step, int order);
Matrix apply_h2_prox(const Matrix& L, const RegularizerSpec& reg, double step, int order);

}  // namespace silvar::regularizers

#endif
