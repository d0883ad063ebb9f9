#include "silvar/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace silvar::conjugate {

Vector cumtrapz(const Vector& knots, const Vector& values) {
    if (knots.size() != values.size()) {
        throw std::invalid_argument("cumtrapz: knot/value length mismatch");
    }
    if (knots.size() == 0) throw std::invalid_argument("cumtrapz: empty input");
    Vector G(knots.size());
    G(0) = 0.0;
    for (Eigen::Index i = 1; i < knots.size(); ++i) {
        const double dx = knots(i) - knots(i - 1);
        if (dx < 0.0) throw std::invalid_argument("cumtrapz: knots not sorted ascending");
        G(i) = G(i - 1) + 0.5 * (values(i) + values(i - 1)) * dx;
    }
    return G;
}

IntegratedLink integrate_link(const LinkEstimate& link) {
    IntegratedLink out;
    out.knots = link.knots;
    out.G_values = cumtrapz(link.knots, link.values);
    out.conjugate_domain_lo = link.values.minCoeff();
    out.conjugate_domain_hi = link.values.maxCoeff();
    return out;
}

Vector dlt(const Vector& knots, const Vector& G, const Vector& query) {
    if (knots.size() != G.size()) throw std::invalid_argument("dlt: knot/G length mismatch");
    if (knots.size() == 0) throw std::invalid_argument("dlt: empty grid");
    const Eigen::Index q = knots.size();

    // Lower convex hull of (knots, G); the conjugate of the grid function
    // coincides with the conjugate of its convex envelope, and on the hull
    // the maximizing index is nondecreasing in the query.
    std::vector<Eigen::Index> hull;
    hull.reserve(static_cast<std::size_t>(q));
    for (Eigen::Index i = 0; i < q; ++i) {
        while (hull.size() >= 2) {
            const Eigen::Index a = hull[hull.size() - 2];
            const Eigen::Index b = hull[hull.size() - 1];
            // drop b when it lies on or above segment a--i
            const double lhs = (G(b) - G(a)) * (knots(i) - knots(a));
            const double rhs = (G(i) - G(a)) * (knots(b) - knots(a));
            if (lhs >= rhs) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(query.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&query](Eigen::Index a, Eigen::Index b) { return query(a) < query(b); });

    Vector out(query.size());
    std::size_t ptr = 0;
    for (const Eigen::Index j : order) {
        const double y = query(j);
        while (ptr + 1 < hull.size()) {
            const Eigen::Index cur = hull[ptr];
            const Eigen::Index nxt = hull[ptr + 1];
            if (knots(nxt) * y - G(nxt) >= knots(cur) * y - G(cur)) {
                ++ptr;
            } else {
                break;
            }
        }
        out(j) = knots(hull[ptr]) * y - G(hull[ptr]);
    }
    return out;
}

double unit_tail_conjugate(const IntegratedLink& integral, const LinkEstimate& link, double y) {
    const Vector& k = integral.knots;
    const Vector& v = link.values;
    const Vector& G = integral.G_values;
    const Eigen::Index q = k.size();
    if (q == 0) throw std::invalid_argument("unit_tail_conjugate: empty link");

    double theta;
    double G_theta;
    if (y <= v(0)) {
        const double d = v(0) - y;  // descend the left unit-slope tail
        theta = k(0) - d;
        G_theta = G(0) - (v(0) * d - 0.5 * d * d);
    } else if (y >= v(q - 1)) {
        const double d = y - v(q - 1);
        theta = k(q - 1) + d;
        G_theta = G(q - 1) + v(q - 1) * d + 0.5 * d * d;
    } else {
        // first knot with value >= y; its left neighbor starts the segment
        const double* begin = v.data();
        Eigen::Index hi = std::lower_bound(begin, begin + q, y) - begin;
        if (hi == 0) hi = 1;
        const Eigen::Index lo = hi - 1;
        const double dv = v(hi) - v(lo);
        if (dv > 0.0) {
            const double w = (y - v(lo)) / dv;
            theta = k(lo) + w * (k(hi) - k(lo));
            G_theta = G(lo) + 0.5 * (v(lo) + y) * (theta - k(lo));
        } else {
            theta = k(lo);
            G_theta = G(lo);
        }
    }
    return y * theta - G_theta;
}

double objective_unit_tails(const Matrix& Y, const Matrix& Theta, const LinkEstimate& link) {
    if (Y.rows() != Theta.rows() || Y.cols() != Theta.cols()) {
        throw std::invalid_argument("objective: Y/Theta shape mismatch");
    }
    const IntegratedLink integral = integrate_link(link);
    double total = 0.0;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            total += unit_tail_conjugate(integral, link, Y(i, j)) +
                     eval_integral(integral, link, Theta(i, j)) - Y(i, j) * Theta(i, j);
        }
    }
    return total / static_cast<double>(Y.cols());
}

double eval_link(const LinkEstimate& link, double t) {
    const Vector& k = link.knots;
    const Vector& v = link.values;
    const Eigen::Index q = k.size();
    if (q == 0) throw std::invalid_argument("eval_link: empty link");
    if (q == 1) return v(0);

    if (t <= k(0)) {
        const double slope = (v(1) - v(0)) / (k(1) - k(0));
        return v(0) + slope * (t - k(0));
    }
    if (t >= k(q - 1)) {
        const double slope = (v(q - 1) - v(q - 2)) / (k(q - 1) - k(q - 2));
        return v(q - 1) + slope * (t - k(q - 1));
    }
    // first knot strictly greater than t
    const double* begin = k.data();
    const Eigen::Index hi = std::upper_bound(begin, begin + q, t) - begin;
    const Eigen::Index lo = hi - 1;
    if (t == k(lo)) return v(lo);
    const double w = (t - k(lo)) / (k(hi) - k(lo));
    return v(lo) + w * (v(hi) - v(lo));
}

Matrix eval_link(const LinkEstimate& link, const Matrix& T) {
    Matrix out(T.rows(), T.cols());
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
        for (Eigen::Index i = 0; i < T.rows(); ++i) out(i, j) = eval_link(link, T(i, j));
    }
    return out;
}

double eval_integral(const IntegratedLink& integral, const LinkEstimate& link, double t) {
    const Vector& k = integral.knots;
    const Vector& G = integral.G_values;
    const Eigen::Index q = k.size();
    if (q == 0) throw std::invalid_argument("eval_integral: empty integral");
    if (q == 1) {
        // single knot: the link is constant, G extends linearly
        return link.values(0) * (t - k(0));
    }
    if (t <= k(0)) {
        return G(0) - 0.5 * (eval_link(link, t) + link.values(0)) * (k(0) - t);
    }
    if (t >= k(q - 1)) {
        return G(q - 1) + 0.5 * (link.values(q - 1) + eval_link(link, t)) * (t - k(q - 1));
    }
    const double* begin = k.data();
    const Eigen::Index hi = std::upper_bound(begin, begin + q, t) - begin;
    const Eigen::Index lo = hi - 1;
    if (t == k(lo)) return G(lo);
    // trapezoid-consistent quadratic segment
    return G(lo) + 0.5 * (link.values(lo) + eval_link(link, t)) * (t - k(lo));
}

double objective_from_integral(const Matrix& Y, const Matrix& Theta,
                               const IntegratedLink& integral, const LinkEstimate& link) {
    if (Y.rows() != Theta.rows() || Y.cols() != Theta.cols()) {
        throw std::invalid_argument("objective: Y/Theta shape mismatch");
    }
    const Eigen::Index n = Y.cols();
    const Eigen::Map<const Vector> vy(Y.data(), Y.size());
    const Vector gstar = dlt(integral.knots, integral.G_values, vy);

    double total = gstar.sum();
    for (Eigen::Index j = 0; j < Theta.cols(); ++j) {
        for (Eigen::Index i = 0; i < Theta.rows(); ++i) {
            total += eval_integral(integral, link, Theta(i, j)) - Y(i, j) * Theta(i, j);
        }
    }
    return total / static_cast<double>(n);
}

double objective_value(const Matrix& Y, const Matrix& Theta, const LinkEstimate& link) {
    return objective_from_integral(Y, Theta, integrate_link(link), link);
}

}  // namespace silvar::conjugate
