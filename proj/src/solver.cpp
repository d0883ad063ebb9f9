#include "silvar/solver.hpp"

#include "silvar/conjugate.hpp"
#include "silvar/isotonic.hpp"
#include "silvar/regularizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace silvar::solver {

double FixedLink::operator()(double t) const {
    switch (kind) {
        case NamedLink::identity:
            return t;
        case NamedLink::softplus: {
            const double a = scale * t;
            return a > 30.0 ? a : std::log1p(std::exp(a));
        }
        case NamedLink::scaled_logistic:
            return 2.0 / (1.0 + std::exp(-scale * t)) - 1.0;
        case NamedLink::log1pexp: {
            return t > 30.0 ? t : std::log1p(std::exp(t));
        }
    }
    return t;
}

LinkEstimate make_link_estimate(const Vector& theta, const Vector& fitted,
                                double lipschitz_bound) {
    if (theta.size() == 0 || theta.size() != fitted.size()) {
        throw std::invalid_argument("make_link_estimate: bad input lengths");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(theta.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&theta](Eigen::Index a, Eigen::Index b) { return theta(a) < theta(b); });

    // collapse exact duplicates (tied grid points carry equal fitted values
    // up to the projection tolerance; use their mean)
    std::vector<double> knots, values;
    knots.reserve(order.size());
    values.reserve(order.size());
    std::size_t i = 0;
    while (i < order.size()) {
        const double k = theta(order[i]);
        double sum = 0.0;
        std::size_t count = 0;
        while (i < order.size() && theta(order[i]) == k) {
            sum += fitted(order[i]);
            ++count;
            ++i;
        }
        knots.push_back(k);
        values.push_back(sum / static_cast<double>(count));
    }

    // clamp into the monotone Lipschitz cone so the invariant holds exactly
    for (std::size_t j = 1; j < values.size(); ++j) {
        const double lo = values[j - 1];
        const double hi = values[j - 1] + lipschitz_bound * (knots[j] - knots[j - 1]);
        values[j] = std::clamp(values[j], lo, hi);
    }

    LinkEstimate link;
    link.knots = Eigen::Map<const Vector>(knots.data(), static_cast<Eigen::Index>(knots.size()));
    link.values =
        Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    link.lipschitz_bound = lipschitz_bound;
    return link;
}

namespace {

double max_grid_slope(const Vector& theta, const Vector& fitted) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(theta.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&theta](Eigen::Index a, Eigen::Index b) { return theta(a) < theta(b); });
    double worst = 0.0;
    for (std::size_t j = 1; j < order.size(); ++j) {
        const double dk = theta(order[j]) - theta(order[j - 1]);
        if (dk > 0.0) {
            worst = std::max(worst, (fitted(order[j]) - fitted(order[j - 1])) / dk);
        }
    }
    return worst;
}

MarginalGradient gradient_from_fit(const Matrix& Y, const Matrix& X, const Vector& vtheta,
                                   const Vector& fitted, double lipschitz_bound,
                                   bool lmr_converged) {
    MarginalGradient out;
    const Eigen::Index n = Y.cols();
    const Eigen::Map<const Matrix> Ghat(fitted.data(), Y.rows(), Y.cols());
    out.gradient = (Ghat - Y) * X.transpose() / static_cast<double>(n);
    out.link = make_link_estimate(vtheta, fitted, lipschitz_bound);
    out.fitted = fitted;
    out.lmr_converged = lmr_converged;
    return out;
}

}  // namespace

MarginalGradient marginal_gradient(const Matrix& Y, const Matrix& X, const Matrix& A_plus_L,
                                   const SolverConfig& config) {
    if (A_plus_L.cols() != X.rows() || A_plus_L.rows() != Y.rows()) {
        throw std::invalid_argument("marginal_gradient: parameter shape mismatch");
    }
    const Matrix Theta = A_plus_L * X;
    const Eigen::Map<const Vector> vy(Y.data(), Y.size());
    const Eigen::Map<const Vector> vtheta(Theta.data(), Theta.size());
    const auto fit = isotonic::lmr(vy, vtheta, config);
    return gradient_from_fit(Y, X, vtheta, fit.fitted, 1.0, fit.converged);
}

MarginalGradient fixed_link_gradient(const Matrix& Y, const Matrix& X, const Matrix& A_plus_L,
                                     const FixedLink& link) {
    if (A_plus_L.cols() != X.rows() || A_plus_L.rows() != Y.rows()) {
        throw std::invalid_argument("fixed_link_gradient: parameter shape mismatch");
    }
    const Matrix Theta = A_plus_L * X;
    const Eigen::Map<const Vector> vtheta(Theta.data(), Theta.size());
    Vector fitted(vtheta.size());
    for (Eigen::Index i = 0; i < vtheta.size(); ++i) fitted(i) = link(vtheta(i));
    const double bound = std::max(1.0, max_grid_slope(vtheta, fitted) * (1.0 + 1e-12));
    return gradient_from_fit(Y, X, vtheta, fitted, bound, true);
}

double marginalized_objective(const Matrix& Y, const Matrix& X, const Matrix& A_plus_L,
                              const SolverConfig& config) {
    if (Y.size() == 0) throw std::invalid_argument("marginalized_objective: empty data");
    const Matrix Theta = A_plus_L * X;
    const Eigen::Map<const Vector> vy(Y.data(), Y.size());
    const Eigen::Map<const Vector> vtheta(Theta.data(), Theta.size());
    const auto fit = isotonic::lmr(vy, vtheta, config);
    const LinkEstimate link = make_link_estimate(vtheta, fit.fitted, 1.0);
    return conjugate::objective_unit_tails(Y, Theta, link);
}

namespace {

struct Evaluation {
    double composite = 0.0;
    double smooth = 0.0;
    LinkEstimate link;
};

using LinkValuesFn = std::function<Vector(const Vector& vtheta, double& bound)>;
using GradientFn = std::function<MarginalGradient(const Matrix& A_plus_L)>;

FitOutcome run_proximal_loop(const Matrix& Y, const Matrix& X, const RegularizerSpec& reg,
                             const SolverConfig& config, int order, const GradientFn& gradient,
                             const LinkValuesFn& link_values) {
    validate_config(config);
    if (Y.cols() != X.cols()) throw std::invalid_argument("fit: Y and X column counts differ");
    if (Y.size() == 0 || X.size() == 0) throw std::invalid_argument("fit: empty data");

    const auto t_start = std::chrono::steady_clock::now();
    const Eigen::Index m = Y.rows();
    const Eigen::Index p = X.rows();
    const bool freeze_L = reg.h2_kind == H2Kind::none;

    const auto evaluate = [&](const Matrix& A, const Matrix& L) {
        const Matrix Theta = (A + L) * X;
        const Eigen::Map<const Vector> vtheta(Theta.data(), Theta.size());
        double bound = 1.0;
        const Vector fitted = link_values(vtheta, bound);
        Evaluation ev;
        ev.link = make_link_estimate(vtheta, fitted, bound);
        ev.smooth = conjugate::objective_unit_tails(Y, Theta, ev.link);
        ev.composite = ev.smooth + regularizers::h1_value(A, reg, order) +
                       regularizers::h2_value(L, reg, order);
        if (!std::isfinite(ev.composite)) {
            throw std::runtime_error("fit: objective is not finite (rescale the data?)");
        }
        return ev;
    };

    Matrix A = Matrix::Zero(m, p);
    Matrix L = Matrix::Zero(m, p);
    Matrix A_prev = A;
    Matrix L_prev = L;

    Evaluation current = evaluate(A, L);
    FitReport report;
    report.objective_trace.push_back(current.composite);

    double step = config.initial_step;
    double t_momentum = 1.0;
    const double step_floor = 1e-14 * config.initial_step;
    bool converged = false;
    int iter = 0;

    Matrix S_prev;       // previous gradient point, for the spectral step
    Matrix grad_prev;

    // The residual direction can die while a pure rescaling of the
    // parameters still improves the fit: the link estimate absorbs scale
    // errors, so they never appear in the residuals. Probe a log grid of
    // scales (then refine around the winner) before settling.
    const auto try_scale_rescue = [&]() {
        double best_scale = 1.0;
        Evaluation best_eval = current;
        const auto probe = [&](double c) {
            if (c == 1.0) return;
            const Matrix A_scaled = c * A;
            const Matrix L_scaled = freeze_L
                                        ? Matrix(Matrix::Zero(m, p))
                                        : regularizers::apply_h2_prox(c * L, reg, 0.0, order);
            const Evaluation ev = evaluate(A_scaled, L_scaled);
            if (ev.composite < best_eval.composite) {
                best_eval = ev;
                best_scale = c;
            }
        };
        for (int k = -8; k <= 8; ++k) probe(std::pow(2.0, k / 4.0));
        const double center = best_scale;
        for (int k = -7; k <= 7; ++k) probe(center * std::pow(2.0, k / 32.0));
        if (best_scale == 1.0) return false;
        A_prev = A;
        L_prev = L;
        A *= best_scale;
        if (!freeze_L) L = regularizers::apply_h2_prox(best_scale * L, reg, 0.0, order);
        current = best_eval;
        report.objective_trace.push_back(current.composite);
        t_momentum = 1.0;
        step = config.initial_step;
        return true;
    };

    for (; iter < config.max_iters; ++iter) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double beta = (t_momentum - 1.0) / t_next;

        Matrix Ae = A + beta * (A - A_prev);
        Matrix Le = freeze_L ? L : Matrix(L + beta * (L - L_prev));
        MarginalGradient mg = gradient(Ae + Le);

        if (config.spectral_step && S_prev.size() > 0) {
            const Matrix dS = (Ae + Le) - S_prev;
            const Matrix dG = mg.gradient - grad_prev;
            const double denom = (dS.array() * dG.array()).sum();
            if (denom > 0.0) {
                const double bb = dS.squaredNorm() / denom;
                step = std::clamp(bb, step_floor, 1e6 * config.initial_step);
            }
        }
        S_prev = Ae + Le;
        grad_prev = mg.gradient;

        bool restarted = beta == 0.0;
        bool accepted = false;
        bool shrank = false;
        Matrix A_cand, L_cand;
        Evaluation cand;
        while (!accepted) {
            A_cand = regularizers::apply_h1_prox(Ae - step * mg.gradient, reg, step, order);
            L_cand = freeze_L ? Matrix(Matrix::Zero(m, p))
                              : regularizers::apply_h2_prox(Le - step * mg.gradient, reg, step,
                                                            order);
            cand = evaluate(A_cand, L_cand);
            if (cand.composite < current.composite) {
                accepted = true;
            } else if (!restarted) {
                // objective went up at the extrapolated point: restart momentum
                restarted = true;
                t_momentum = 1.0;
                Ae = A;
                Le = L;
                mg = gradient(Ae + Le);
                S_prev = Ae + Le;
                grad_prev = mg.gradient;
            } else {
                step *= config.backtracking_shrink;
                shrank = true;
                if (step < step_floor) break;
            }
        }
        if (!accepted) {
            if (try_scale_rescue()) continue;
            converged = true;  // no descent possible at the numerical floor
            break;
        }
        if (!shrank && !config.spectral_step) {
            // recover from earlier backtracking once steps succeed again
            step = std::min(step / config.backtracking_shrink, config.initial_step);
        }

        const double drop = current.composite - cand.composite;
        const double rel = std::abs(drop) / std::max(1.0, std::abs(current.composite));
        A_prev = A;
        L_prev = L;
        A = A_cand;
        L = L_cand;
        current = cand;
        report.objective_trace.push_back(current.composite);
        t_momentum = restarted ? 1.0 : t_next;

        if (rel < config.objective_tolerance) {
            if (try_scale_rescue()) continue;
            converged = true;
            ++iter;
            break;
        }
    }

    report.iterations = iter;
    report.converged = converged;
    report.final_step = step;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    FitOutcome outcome;
    outcome.A = std::move(A);
    outcome.L = std::move(L);
    outcome.link = current.link;
    outcome.report = std::move(report);
    return outcome;
}

}  // namespace

FitOutcome proximal_fit(const Matrix& Y, const Matrix& X, const RegularizerSpec& reg,
                        const SolverConfig& config, int order) {
    const Eigen::Map<const Vector> vy(Y.data(), Y.size());
    const GradientFn gradient = [&](const Matrix& S) {
        return marginal_gradient(Y, X, S, config);
    };
    const LinkValuesFn link_values = [&, vy](const Vector& vtheta, double& bound) {
        bound = 1.0;
        return isotonic::lmr(vy, vtheta, config).fitted;
    };
    return run_proximal_loop(Y, X, reg, config, order, gradient, link_values);
}

FitOutcome proximal_fit_glm(const Matrix& Y, const Matrix& X, const FixedLink& link,
                            const RegularizerSpec& reg, const SolverConfig& config, int order) {
    const GradientFn gradient = [&](const Matrix& S) {
        return fixed_link_gradient(Y, X, S, link);
    };
    const LinkValuesFn link_values = [&link](const Vector& vtheta, double& bound) {
        Vector fitted(vtheta.size());
        for (Eigen::Index i = 0; i < vtheta.size(); ++i) fitted(i) = link(vtheta(i));
        bound = std::max(1.0, max_grid_slope(vtheta, fitted) * (1.0 + 1e-12));
        return fitted;
    };
    return run_proximal_loop(Y, X, reg, config, order, gradient, link_values);
}

}  // namespace silvar::solver
