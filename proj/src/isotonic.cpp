#include "silvar/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace silvar::isotonic {

RegressionInstance make_instance(const Vector& y, const Vector& x) {
    if (y.size() == 0) throw std::invalid_argument("regression instance: empty input");
    if (y.size() != x.size()) {
        throw std::invalid_argument("regression instance: y and x lengths differ");
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i))) {
            throw std::invalid_argument("regression instance: non-finite index position");
        }
    }
    RegressionInstance inst;
    inst.y = y;
    inst.x = x;
    inst.sort_permutation.resize(static_cast<std::size_t>(x.size()));
    std::iota(inst.sort_permutation.begin(), inst.sort_permutation.end(), Eigen::Index{0});
    std::stable_sort(inst.sort_permutation.begin(), inst.sort_permutation.end(),
                     [&x](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
    return inst;
}

Vector cusum(const Vector& t) {
    Vector s(t.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        acc += t(i);
        s(i) = acc;
    }
    return s;
}

Vector pav_sorted(const Vector& y_sorted) {
    const Eigen::Index n = y_sorted.size();
    if (n == 0) throw std::invalid_argument("pav: empty input");

    // Stack of pooled blocks (mean value, sample count); one sweep, merging
    // backwards whenever a new block undercuts the top of the stack.
    std::vector<double> value;
    std::vector<Eigen::Index> weight;
    value.reserve(static_cast<std::size_t>(n));
    weight.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = y_sorted(i);
        Eigen::Index w = 1;
        while (!value.empty() && value.back() >= v) {
            v = (value.back() * static_cast<double>(weight.back()) + v * static_cast<double>(w)) /
                static_cast<double>(weight.back() + w);
            w += weight.back();
            value.pop_back();
            weight.pop_back();
        }
        value.push_back(v);
        weight.push_back(w);
    }

    Vector fitted(n);
    Eigen::Index pos = 0;
    for (std::size_t b = 0; b < value.size(); ++b) {
        for (Eigen::Index k = 0; k < weight[b]; ++k) fitted(pos++) = value[b];
    }
    return fitted;
}

namespace {

Vector gather(const Vector& v, const std::vector<Eigen::Index>& perm) {
    Vector out(v.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(perm[i]);
    return out;
}

Vector scatter(const Vector& v, const std::vector<Eigen::Index>& perm) {
    Vector out(v.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out(perm[i]) = v(static_cast<Eigen::Index>(i));
    return out;
}

// Projection onto { g : g_[j+1] - g_[j] <= t_[j+1] } for the gap vector with
// cumulative sums s: negate, shift by s, PAV, undo.
Vector upper_projection(const Vector& y_sorted, const Vector& s) {
    return s - pav_sorted(s - y_sorted);
}

// Forward clamp into { 0 <= z_{j+1} - z_j <= t_{j+1} }; the accelerated
// iterate can sit a hair outside the feasible chain.
Vector clip_chain(const Vector& z, const Vector& t) {
    Vector out = z;
    for (Eigen::Index j = 1; j < z.size(); ++j) {
        out(j) = std::clamp(out(j), out(j - 1), out(j - 1) + t(j));
    }
    return out;
}

// Certified l2 distance from the projection of y for a feasible point z.
// The prefix sums mu_j = -sum_{k<=j}(z_k - y_k) are dual-feasible multipliers
// (positive part on the lower constraints, negative part on the upper ones),
// and the duality gap collapses to complementarity products plus the squared
// mean residual; 1-strong convexity then gives ||z - P||^2 <= 2 gap. Every
// term is nonnegative, so the computation is free of cancellation.
double certified_error(const Vector& z, const Vector& y, const Vector& t) {
    const Eigen::Index n = z.size();
    double mu = 0.0;
    double gap = 0.0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        mu -= z(j) - y(j);
        const double slack = z(j + 1) - z(j);
        if (mu > 0.0) {
            gap += mu * slack;
        } else {
            gap += (-mu) * (t(j + 1) - slack);
        }
    }
    mu -= z(n - 1) - y(n - 1);  // now -sum of all residuals
    gap += 0.5 * mu * mu;
    return std::sqrt(2.0 * std::max(gap, 0.0));
}

// Projected-gradient polish in (g_1, differences) coordinates with implicit
// prefix/suffix-sum operators; used when the Dykstra loop fails to certify.
Vector polish_chain(const Vector& start, const Vector& y, const Vector& t, double tol,
                    int max_iters) {
    const Eigen::Index n = y.size();
    Vector u(n);  // u(0) = g_1, u(j) = difference j
    u(0) = start(0);
    for (Eigen::Index j = 1; j < n; ++j) u(j) = start(j) - start(j - 1);

    const auto expand = [n](const Vector& uu) {
        Vector g(n);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += uu(i);
            g(i) = acc;
        }
        return g;
    };
    const auto grad = [n, &y, &expand](const Vector& uu) {
        const Vector r = expand(uu) - y;
        Vector gr(n);
        double acc = 0.0;
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            acc += r(i);
            gr(i) = acc;
        }
        return gr;
    };
    const auto clamp_u = [n, &t](Vector& uu) {
        for (Eigen::Index j = 1; j < n; ++j) uu(j) = std::clamp(uu(j), 0.0, t(j));
    };

    // power iteration for the step size
    double lip = 1.0;
    {
        Vector v = Vector::Ones(n).normalized();
        for (int it = 0; it < 40; ++it) {
            Vector bv = expand(v);
            Vector btbv(n);
            double acc = 0.0;
            for (Eigen::Index i = n - 1; i >= 0; --i) {
                acc += bv(i);
                btbv(i) = acc;
            }
            lip = btbv.norm();
            v = btbv / lip;
        }
        lip *= 1.05;
    }

    Vector momentum = u;
    Vector u_prev = u;
    double t_prev = 1.0;
    double f_prev = (expand(u) - y).squaredNorm();
    Vector best = clip_chain(expand(u), t);
    double best_err = certified_error(best, y, t);
    for (int it = 0; it < max_iters && best_err > tol; ++it) {
        Vector u_next = momentum - grad(momentum) / lip;
        clamp_u(u_next);
        const double f = (expand(u_next) - y).squaredNorm();
        if (f > f_prev) {
            momentum = u;
            t_prev = 1.0;
            u_next = momentum - grad(momentum) / lip;
            clamp_u(u_next);
            f_prev = (expand(u_next) - y).squaredNorm();
        } else {
            f_prev = f;
        }
        u_prev = u;
        u = u_next;
        const double t_acc = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
        momentum = u + ((t_prev - 1.0) / t_acc) * (u - u_prev);
        t_prev = t_acc;
        if ((it & 7) == 0) {
            const Vector cand = clip_chain(expand(u), t);
            const double err = certified_error(cand, y, t);
            if (err < best_err) {
                best_err = err;
                best = cand;
            }
        }
    }
    const Vector cand = clip_chain(expand(u), t);
    if (certified_error(cand, y, t) < best_err) best = cand;
    return best;
}

}  // namespace

Vector pav(const RegressionInstance& inst) {
    return scatter(pav_sorted(gather(inst.y, inst.sort_permutation)), inst.sort_permutation);
}

Vector gpav(const RegressionInstance& inst, const Vector& t) {
    if (t.size() != inst.y.size()) throw std::invalid_argument("gpav: gap vector length mismatch");
    const Vector s = cusum(t);
    const Vector y_sorted = gather(inst.y, inst.sort_permutation);
    Vector fitted = pav_sorted(y_sorted - s) + s;
    return scatter(fitted, inst.sort_permutation);
}

LmrResult lmr(const RegressionInstance& inst, const SolverConfig& config) {
    const Eigen::Index n = inst.y.size();
    const Vector y = gather(inst.y, inst.sort_permutation);
    const Vector x = gather(inst.x, inst.sort_permutation);

    Vector t(n);
    t(0) = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) t(i) = x(i) - x(i - 1);
    const Vector s = cusum(t);

    const double delta = config.dykstra_tolerance;
    const double epsilon = config.dykstra_epsilon;
    // Certified-error target: movement of the iterate is a poor convergence
    // signal here (the alternating projections can stall for hundreds of
    // iterations), so we stop on the duality-gap bound instead. The relative
    // part keeps the target reachable in double precision on large problems.
    const double tol =
        std::max(100.0 * delta, 1e-8 * (1.0 + y.norm()) * std::sqrt(static_cast<double>(n)));

    // Dykstra state: the next lower-projection input is carrier - v0. The
    // increments start at zero so the limit is the projection of y itself.
    Vector carrier = y;
    Vector v0 = Vector::Zero(n);
    Vector v1 = Vector::Zero(n);
    // Projection pair memory for the acceleration coefficient.
    Vector g_lower = pav_sorted(y);
    Vector g_upper = upper_projection(y, s);
    Vector z = g_upper;

    Vector best = clip_chain(z, t);
    double best_err = certified_error(best, y, t);

    LmrResult result;
    result.converged = best_err <= tol;
    int k = 0;
    for (; k < config.lmr_max_iters && best_err > tol; ++k) {
        const Vector g_lower_next = pav_sorted(carrier - v0);
        const Vector g_upper_next = upper_projection(g_lower_next - v1, s);
        v0 = g_lower_next - (carrier - v0);
        v1 = g_upper_next - (g_lower_next - v1);
        carrier = g_upper_next;

        const Vector gap = g_lower - g_upper;
        const Vector gap_next = g_lower_next - g_upper_next;
        const double denom = gap.squaredNorm() + gap_next.dot(gap);
        if (std::abs(denom) >= epsilon) {
            const double alpha = gap.squaredNorm() / denom;
            z = g_upper + alpha * (g_upper_next - g_upper);
        } else {
            z = 0.5 * (g_lower_next + g_upper_next);
        }
        g_lower = g_lower_next;
        g_upper = g_upper_next;

        const Vector candidate = clip_chain(z, t);
        const double err = certified_error(candidate, y, t);
        if (err < best_err) {
            best_err = err;
            best = candidate;
        }
        if (best_err <= tol) {
            result.converged = true;
            ++k;
            break;
        }
    }
    result.iterations = k;

    // Projected-gradient rescue for instances the alternating projections
    // leave uncertified. Worth its cost only at moderate sizes; larger
    // problems keep the best iterate and the soft flag.
    if (best_err > tol && n <= 2000) {
        best = polish_chain(best, y, t, tol, 4000);
        best_err = certified_error(best, y, t);
        result.converged = best_err <= tol;
    }
    result.fitted = scatter(best, inst.sort_permutation);
    return result;
}

LmrResult lmr(const Vector& y, const Vector& x, const SolverConfig& config) {
    return lmr(make_instance(y, x), config);
}

}  // namespace silvar::isotonic
