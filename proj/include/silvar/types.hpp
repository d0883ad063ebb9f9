#ifndef SILVAR_TYPES_HPP
#define SILVAR_TYPES_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace silvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Regression data. Columns are samples: Y is m x n (responses), X is p x n
/// (regressors), and column i of Y pairs with column i of X.
struct Dataset {
    Matrix Y;
    Matrix X;
    std::vector<double> timestamps;  // optional, one per column when present

    Eigen::Index sample_count() const { return Y.cols(); }
};

/// Monotone nondecreasing, u-Lipschitz link estimate stored pointwise:
/// strictly ascending knots with fitted values satisfying
///   0 <= values[j+1] - values[j] <= u * (knots[j+1] - knots[j]).
struct LinkEstimate {
    Vector knots;
    Vector values;
    double lipschitz_bound = 1.0;

    Eigen::Index size() const { return knots.size(); }
};

enum class ModelMode { multitask, autoregressive };

/// Fitted model: link plus sparse part A and low-rank part L. In
/// autoregressive mode A and L are N x (N*M) with M contiguous N x N lag
/// blocks, lag 1 first.
struct SilvarModel {
    LinkEstimate link;
    Matrix A;
    Matrix L;
    ModelMode mode = ModelMode::multitask;
    int order = 1;
    double lambda_s = 0.0;
    double lambda_l = 0.0;
};

enum class H1Kind { element_l1, group_l2_across_lags, none };

/// h2 = none pins L to zero (the sparse-SIM configuration).
enum class H2Kind { nuclear_norm, nuclear_ball, none };

struct RegularizerSpec {
    H1Kind h1_kind = H1Kind::element_l1;
    H2Kind h2_kind = H2Kind::nuclear_norm;
    double lambda_s = 0.0;
    double lambda_l = 0.0;
};

struct SolverConfig {
    int max_iters = 500;
    double objective_tolerance = 1e-7;
    double dykstra_tolerance = 1e-8;  // delta: Dykstra loop exit threshold
    double dykstra_epsilon = 1e-9;    // guard for the acceleration denominator
    int lmr_max_iters = 128;
    double backtracking_shrink = 0.5;
    double initial_step = 1.0;
    long seed = 0;
    bool spectral_step = false;  // Barzilai-Borwein initial step per iteration
};

struct FitReport {
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    double final_step = 0.0;
    double wall_time = 0.0;  // seconds
};

/// Throws std::invalid_argument on column-count mismatch or any non-finite
/// entry (message names the offending row/column). Returns its input.
const Dataset& validate_dataset(const Dataset& d);

void validate_regularizer(const RegularizerSpec& reg, ModelMode mode);
void validate_config(const SolverConfig& config);

}  // namespace silvar

#endif
