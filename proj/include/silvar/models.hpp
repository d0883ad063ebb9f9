#ifndef SILVAR_MODELS_HPP
#define SILVAR_MODELS_HPP

#include "silvar/solver.hpp"
#include "silvar/types.hpp"

#include <utility>
#include <vector>

namespace silvar::models {

/// Lagged design built from an N x K series: responses are columns M+1..K,
/// regressors the stacked lags (x_{k-1}^T ... x_{k-M}^T)^T, lag 1 first.
struct ArDesign {
    Matrix Y;  // N x (K - M)
    Matrix X;  // N*M x (K - M)
    int order = 1;
};

ArDesign build_ar_design(const Matrix& series, int order);

struct TrendEstimate {
    Matrix L_prime;                     // N x K, one trend value per column
    std::pair<int, int> reliable_range; // 1-based inclusive [M+1, K-M]
    double ridge_lambda = 0.0;
    bool converged = true;
};

std::pair<SilvarModel, FitReport> fit_silvar(const Dataset& d, const RegularizerSpec& reg,
                                             const SolverConfig& config);

/// Requires K > 2 * order. h1 is typically the group penalty across lags and
/// h2 the per-block nuclear norm.
std::pair<SilvarModel, FitReport> fit_silvar_ar(const Matrix& series, int order,
                                                const RegularizerSpec& reg,
                                                const SolverConfig& config);

/// Same proximal loop with the link fixed instead of estimated.
std::pair<SilvarModel, FitReport> fit_glm_oracle(const Dataset& d, const solver::FixedLink& link,
                                                 const RegularizerSpec& reg,
                                                 const SolverConfig& config);

/// fit_silvar with L pinned to zero (h2 disabled).
std::pair<SilvarModel, FitReport> sparse_sim_baseline(const Dataset& d,
                                                      const RegularizerSpec& reg,
                                                      const SolverConfig& config);

/// Ridge trend extraction: minimizes over all N*K trend values
///   sum_k || l'_k - sum_i A^(i) l'_{k-i} - sum_i L^(i) x_{k-i} ||^2
///   + lambda ||L'||_F^2
/// by conjugate gradients on the normal equations. Trend columns outside
/// [M+1, K-M] lack full lag context and are excluded from reliable_range.
TrendEstimate fit_trend(const Matrix& series, const SilvarModel& model, double ridge_lambda);

/// Yhat = g((A + L) X_new) elementwise; depends on A and L only via the sum.
Matrix predict(const SilvarModel& model, const Matrix& X_new);

/// One-step predictions for columns order+1..K of a series (N x (K - order)).
Matrix predict_ar_series(const SilvarModel& model, const Matrix& series);

/// Granger-style adjacency readout a'_ij = ||(a^(1)_ij ... a^(M)_ij)||_2.
Matrix group_norms(const Matrix& A, int order);

/// Validation grid over (lambda_s, lambda_l) with lambda = 10^(i/4).
std::vector<double> lambda_grid(int i_min, int i_max);

enum class FitKind { silvar, glm_oracle, sparse_sim };

struct GridOptions {
    FitKind kind = FitKind::silvar;
    solver::FixedLink glm_link;
    RegularizerSpec reg;       // kinds only; lambdas come from the grid
    SolverConfig config;
    ModelMode mode = ModelMode::multitask;  // autoregressive when the datasets
    int order = 1;                          // hold a prebuilt lagged design
    int jobs = 0;              // 0 = hardware concurrency
    const Matrix* truth_A = nullptr;  // when set, score = mean |A_hat - truth|
};

struct GridCell {
    double lambda_s = 0.0;
    double lambda_l = 0.0;
    double metric = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct GridResult {
    std::vector<GridCell> cells;  // grid order: lambda_s outer, lambda_l inner
    SilvarModel best_model;
    FitReport best_report;
    int best_index = -1;
};

/// Fits every (lambda_s, lambda_l) cell on the training data and scores
/// validation RMSE (or l1 error against truth_A when given). Cells run on a
/// small worker pool; results are ordered by grid index and ties are broken
/// toward larger lambdas.
GridResult grid_search(const Dataset& train, const Dataset& validation,
                       const std::vector<double>& lambdas_s,
                       const std::vector<double>& lambdas_l, const GridOptions& options);

double rmse(const Matrix& predicted, const Matrix& actual);
double mean_abs_error(const Matrix& estimated, const Matrix& truth);

}  // namespace silvar::models

#endif
