#include "silvar/models.hpp"

#include "silvar/conjugate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

namespace silvar::models {

ArDesign build_ar_design(const Matrix& series, int order) {
    const Eigen::Index N = series.rows();
    const Eigen::Index K = series.cols();
    if (order < 1) throw std::invalid_argument("ar design: order must be >= 1");
    if (K <= order) throw std::invalid_argument("ar design: series shorter than the order");

    ArDesign d;
    d.order = order;
    d.Y = series.rightCols(K - order);
    d.X.resize(N * order, K - order);
    for (Eigen::Index j = 0; j < K - order; ++j) {
        const Eigen::Index k = j + order;  // response time index
        for (int lag = 1; lag <= order; ++lag) {
            d.X.block((lag - 1) * N, j, N, 1) = series.col(k - lag);
        }
    }
    return d;
}

namespace {

SilvarModel wrap_model(solver::FitOutcome&& fit, ModelMode mode, int order,
                       const RegularizerSpec& reg) {
    SilvarModel model;
    model.link = std::move(fit.link);
    model.A = std::move(fit.A);
    model.L = std::move(fit.L);
    model.mode = mode;
    model.order = order;
    model.lambda_s = reg.lambda_s;
    model.lambda_l = reg.h2_kind == H2Kind::none ? 0.0 : reg.lambda_l;
    return model;
}

}  // namespace

std::pair<SilvarModel, FitReport> fit_silvar(const Dataset& d, const RegularizerSpec& reg,
                                             const SolverConfig& config) {
    validate_dataset(d);
    validate_regularizer(reg, ModelMode::multitask);
    auto fit = solver::proximal_fit(d.Y, d.X, reg, config, 1);
    FitReport report = std::move(fit.report);
    return {wrap_model(std::move(fit), ModelMode::multitask, 1, reg), std::move(report)};
}

std::pair<SilvarModel, FitReport> fit_silvar_ar(const Matrix& series, int order,
                                                const RegularizerSpec& reg,
                                                const SolverConfig& config) {
    if (series.cols() <= 2 * order) {
        throw std::invalid_argument("ar fit: need strictly more than 2*order time steps");
    }
    validate_regularizer(reg, ModelMode::autoregressive);
    const ArDesign design = build_ar_design(series, order);
    auto fit = solver::proximal_fit(design.Y, design.X, reg, config, order);
    FitReport report = std::move(fit.report);
    return {wrap_model(std::move(fit), ModelMode::autoregressive, order, reg),
            std::move(report)};
}

std::pair<SilvarModel, FitReport> fit_glm_oracle(const Dataset& d, const solver::FixedLink& link,
                                                 const RegularizerSpec& reg,
                                                 const SolverConfig& config) {
    validate_dataset(d);
    validate_regularizer(reg, ModelMode::multitask);
    auto fit = solver::proximal_fit_glm(d.Y, d.X, link, reg, config, 1);
    FitReport report = std::move(fit.report);
    return {wrap_model(std::move(fit), ModelMode::multitask, 1, reg), std::move(report)};
}

std::pair<SilvarModel, FitReport> sparse_sim_baseline(const Dataset& d,
                                                      const RegularizerSpec& reg,
                                                      const SolverConfig& config) {
    RegularizerSpec sim = reg;
    sim.h2_kind = H2Kind::none;
    return fit_silvar(d, sim, config);
}

namespace {

// residual operator of the trend model: (T Lp)_k = l'_k - sum_i A^(i) l'_{k-i}
Matrix trend_apply(const Matrix& Lp, const Matrix& A, Eigen::Index N, int M) {
    const Eigen::Index K = Lp.cols();
    Matrix R(N, K - M);
    for (Eigen::Index j = 0; j < K - M; ++j) {
        const Eigen::Index k = j + M;
        Vector r = Lp.col(k);
        for (int lag = 1; lag <= M; ++lag) {
            r.noalias() -= A.middleCols((lag - 1) * N, N) * Lp.col(k - lag);
        }
        R.col(j) = r;
    }
    return R;
}

Matrix trend_apply_adjoint(const Matrix& R, const Matrix& A, Eigen::Index N, int M,
                           Eigen::Index K) {
    Matrix Z = Matrix::Zero(N, K);
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        const Eigen::Index k = j + M;
        Z.col(k) += R.col(j);
        for (int lag = 1; lag <= M; ++lag) {
            Z.col(k - lag).noalias() -= A.middleCols((lag - 1) * N, N).transpose() * R.col(j);
        }
    }
    return Z;
}

}  // namespace

TrendEstimate fit_trend(const Matrix& series, const SilvarModel& model, double ridge_lambda) {
    if (model.mode != ModelMode::autoregressive) {
        throw std::invalid_argument("fit_trend: model must be autoregressive");
    }
    if (ridge_lambda <= 0.0) throw std::invalid_argument("fit_trend: ridge weight must be > 0");
    const Eigen::Index N = series.rows();
    const Eigen::Index K = series.cols();
    const int M = model.order;
    if (model.A.rows() != N || model.A.cols() != N * M) {
        throw std::invalid_argument("fit_trend: model/series dimension mismatch");
    }
    if (K <= 2 * M) throw std::invalid_argument("fit_trend: series too short");

    // data-side term c_k = sum_i L^(i) x_{k-i}
    Matrix C(N, K - M);
    for (Eigen::Index j = 0; j < K - M; ++j) {
        const Eigen::Index k = j + M;
        Vector c = Vector::Zero(N);
        for (int lag = 1; lag <= M; ++lag) {
            c.noalias() += model.L.middleCols((lag - 1) * N, N) * series.col(k - lag);
        }
        C.col(j) = c;
    }

    // conjugate gradients on (T^T T + lambda I) L' = T^T C
    const auto apply_normal = [&](const Matrix& Lp) {
        return Matrix(trend_apply_adjoint(trend_apply(Lp, model.A, N, M), model.A, N, M, K) +
                      ridge_lambda * Lp);
    };
    const Matrix rhs = trend_apply_adjoint(C, model.A, N, M, K);

    Matrix Lp = Matrix::Zero(N, K);
    Matrix residual = rhs;  // rhs - Op(0)
    Matrix direction = residual;
    double rho = residual.squaredNorm();
    const double rhs_norm = std::sqrt(rhs.squaredNorm());
    const double tol = 1e-8 * std::max(rhs_norm, 1e-30);
    const long max_cg = 10L * static_cast<long>(N) * static_cast<long>(K);
    bool converged = std::sqrt(rho) <= tol;
    for (long it = 0; it < max_cg && !converged; ++it) {
        const Matrix Ad = apply_normal(direction);
        const double alpha = rho / (direction.array() * Ad.array()).sum();
        Lp += alpha * direction;
        residual -= alpha * Ad;
        const double rho_next = residual.squaredNorm();
        if (std::sqrt(rho_next) <= tol) {
            converged = true;
            break;
        }
        direction = residual + (rho_next / rho) * direction;
        rho = rho_next;
    }

    TrendEstimate out;
    out.L_prime = std::move(Lp);
    out.reliable_range = {M + 1, static_cast<int>(K) - M};
    out.ridge_lambda = ridge_lambda;
    out.converged = converged;
    return out;
}

Matrix predict(const SilvarModel& model, const Matrix& X_new) {
    if (model.A.cols() != X_new.rows()) {
        throw std::invalid_argument("predict: regressor dimension mismatch");
    }
    return conjugate::eval_link(model.link, (model.A + model.L) * X_new);
}

Matrix predict_ar_series(const SilvarModel& model, const Matrix& series) {
    const ArDesign design = build_ar_design(series, model.order);
    return predict(model, design.X);
}

Matrix group_norms(const Matrix& A, int order) {
    if (order <= 0 || A.cols() % order != 0) {
        throw std::invalid_argument("group_norms: column count not divisible by order");
    }
    const Eigen::Index N = A.cols() / order;
    Matrix out = Matrix::Zero(A.rows(), N);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            double norm_sq = 0.0;
            for (int m = 0; m < order; ++m) {
                const double a = A(i, j + m * N);
                norm_sq += a * a;
            }
            out(i, j) = std::sqrt(norm_sq);
        }
    }
    return out;
}

std::vector<double> lambda_grid(int i_min, int i_max) {
    if (i_min > i_max) throw std::invalid_argument("lambda_grid: empty exponent range");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(i_max - i_min + 1));
    for (int i = i_min; i <= i_max; ++i) out.push_back(std::pow(10.0, i / 4.0));
    return out;
}

double rmse(const Matrix& predicted, const Matrix& actual) {
    if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
        throw std::invalid_argument("rmse: shape mismatch");
    }
    return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(actual.size()));
}

double mean_abs_error(const Matrix& estimated, const Matrix& truth) {
    if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols()) {
        throw std::invalid_argument("mean_abs_error: shape mismatch");
    }
    return (estimated - truth).cwiseAbs().sum() / static_cast<double>(truth.size());
}

GridResult grid_search(const Dataset& train, const Dataset& validation,
                       const std::vector<double>& lambdas_s,
                       const std::vector<double>& lambdas_l, const GridOptions& options) {
    validate_dataset(train);
    validate_dataset(validation);
    if (train.X.rows() != validation.X.rows() || train.Y.rows() != validation.Y.rows()) {
        throw std::invalid_argument("grid_search: train/validation dimension mismatch");
    }
    if (lambdas_s.empty() || lambdas_l.empty()) {
        throw std::invalid_argument("grid_search: empty lambda grid");
    }

    const std::size_t total = lambdas_s.size() * lambdas_l.size();
    std::vector<GridCell> cells(total);
    std::vector<SilvarModel> models(total);
    std::vector<FitReport> reports(total);

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            const double ls = lambdas_s[idx / lambdas_l.size()];
            const double ll = lambdas_l[idx % lambdas_l.size()];
            RegularizerSpec reg = options.reg;
            reg.lambda_s = ls;
            reg.lambda_l = ll;
            if (options.kind == FitKind::sparse_sim) reg.h2_kind = H2Kind::none;

            std::pair<SilvarModel, FitReport> fit;
            if (options.mode == ModelMode::autoregressive) {
                validate_regularizer(reg, ModelMode::autoregressive);
                auto outcome = options.kind == FitKind::glm_oracle
                                   ? solver::proximal_fit_glm(train.Y, train.X, options.glm_link,
                                                              reg, options.config, options.order)
                                   : solver::proximal_fit(train.Y, train.X, reg, options.config,
                                                          options.order);
                fit.second = std::move(outcome.report);
                fit.first = wrap_model(std::move(outcome), ModelMode::autoregressive,
                                       options.order, reg);
            } else {
                switch (options.kind) {
                    case FitKind::silvar:
                        fit = fit_silvar(train, reg, options.config);
                        break;
                    case FitKind::glm_oracle:
                        fit = fit_glm_oracle(train, options.glm_link, reg, options.config);
                        break;
                    case FitKind::sparse_sim:
                        fit = sparse_sim_baseline(train, reg, options.config);
                        break;
                }
            }
            double metric;
            if (options.truth_A != nullptr) {
                metric = mean_abs_error(fit.first.A, *options.truth_A);
            } else {
                metric = rmse(predict(fit.first, validation.X), validation.Y);
            }
            cells[idx] = {ls, ll, metric, fit.second.iterations, fit.second.converged};
            models[idx] = std::move(fit.first);
            reports[idx] = std::move(fit.second);
        }
    };

    unsigned jobs = options.jobs > 0 ? static_cast<unsigned>(options.jobs)
                                     : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(total));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::future<void>> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) pool.push_back(std::async(std::launch::async, worker));
        for (auto& f : pool) f.get();
    }

    // ties break toward stronger regularization: scan from the largest
    // lambdas and keep strict improvements only
    int best = -1;
    for (std::size_t idx = total; idx-- > 0;) {
        if (best < 0 || cells[idx].metric < cells[static_cast<std::size_t>(best)].metric) {
            best = static_cast<int>(idx);
        }
    }

    GridResult result;
    result.cells = std::move(cells);
    result.best_index = best;
    result.best_model = std::move(models[static_cast<std::size_t>(best)]);
    result.best_report = std::move(reports[static_cast<std::size_t>(best)]);
    return result;
}

}  // namespace silvar::models
