#include "silvar/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace silvar {

namespace {

void check_finite(const Matrix& M, const char* name) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            if (!std::isfinite(M(i, j))) {
                throw std::invalid_argument(std::string(name) + " has a non-finite entry at row " +
                                            std::to_string(i) + ", column " + std::to_string(j));
            }
        }
    }
}

}  // namespace

const Dataset& validate_dataset(const Dataset& d) {
    if (d.Y.cols() != d.X.cols()) {
        throw std::invalid_argument("dataset dimension mismatch: Y has " +
                                    std::to_string(d.Y.cols()) + " columns, X has " +
                                    std::to_string(d.X.cols()));
    }
    check_finite(d.Y, "Y");
    check_finite(d.X, "X");
    return d;
}

void validate_regularizer(const RegularizerSpec& reg, ModelMode mode) {
    if (reg.lambda_s < 0.0 || reg.lambda_l < 0.0) {
        throw std::invalid_argument("regularizer weights must be nonnegative");
    }
    if (reg.h1_kind == H1Kind::group_l2_across_lags && mode != ModelMode::autoregressive) {
        throw std::invalid_argument("group penalty across lags requires autoregressive mode");
    }
}

void validate_config(const SolverConfig& config) {
    if (config.max_iters <= 0 || config.lmr_max_iters <= 0) {
        throw std::invalid_argument("iteration limits must be positive");
    }
    if (config.objective_tolerance <= 0.0 || config.dykstra_tolerance <= 0.0 ||
        config.dykstra_epsilon <= 0.0) {
        throw std::invalid_argument("tolerances must be positive");
    }
    if (config.backtracking_shrink <= 0.0 || config.backtracking_shrink >= 1.0) {
        throw std::invalid_argument("backtracking shrink must lie in (0, 1)");
    }
    if (config.initial_step <= 0.0) {
        throw std::invalid_argument("initial step must be positive");
    }
}

}  // namespace silvar
