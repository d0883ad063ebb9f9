#include "silvar/regularizers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace silvar::regularizers {

namespace {

void check_order(const Matrix& v, int order) {
    if (order <= 0 || v.cols() % order != 0) {
        throw std::invalid_argument("lag-block operation: column count not divisible by order");
    }
}

// projection of singular values onto { s >= 0, sum s = radius }
Vector simplex_projection(const Vector& v, double radius) {
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cum += sorted[k];
        const double candidate = (cum - radius) / static_cast<double>(k + 1);
        if (candidate < sorted[k]) tau = candidate;
    }
    return (v.array() - tau).max(0.0);
}

}  // namespace

Matrix prox_l1(const Matrix& v, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_l1: negative threshold");
    return v.unaryExpr([tau](double a) {
        const double shrunk = std::abs(a) - tau;
        return shrunk > 0.0 ? (a > 0.0 ? shrunk : -shrunk) : 0.0;
    });
}

Matrix prox_group_lags(const Matrix& v, double tau, int order) {
    if (tau < 0.0) throw std::invalid_argument("prox_group_lags: negative threshold");
    check_order(v, order);
    const Eigen::Index block_cols = v.cols() / order;
    Matrix out = v;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < block_cols; ++j) {
            double norm_sq = 0.0;
            for (int m = 0; m < order; ++m) {
                const double a = v(i, j + m * block_cols);
                norm_sq += a * a;
            }
            const double norm = std::sqrt(norm_sq);
            const double scale = norm > tau ? 1.0 - tau / norm : 0.0;
            for (int m = 0; m < order; ++m) out(i, j + m * block_cols) *= scale;
        }
    }
    return out;
}

Matrix prox_nuclear(const Matrix& v, double tau, int* rank_out) {
    if (tau < 0.0) throw std::invalid_argument("prox_nuclear: negative threshold");
    if (tau == 0.0) {
        if (rank_out) {
            Eigen::JacobiSVD<Matrix> svd(v);
            const Vector& s = svd.singularValues();
            *rank_out = static_cast<int>((s.array() > 0.0).count());
        }
        return v;
    }
    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = (svd.singularValues().array() - tau).max(0.0);
    if (rank_out) *rank_out = static_cast<int>((s.array() > 0.0).count());
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Matrix prox_nuclear_blocks(const Matrix& v, double tau, int order) {
    check_order(v, order);
    const Eigen::Index block_cols = v.cols() / order;
    Matrix out(v.rows(), v.cols());
    for (int m = 0; m < order; ++m) {
        out.middleCols(m * block_cols, block_cols) =
            prox_nuclear(v.middleCols(m * block_cols, block_cols), tau);
    }
    return out;
}

Matrix project_nuclear_ball(const Matrix& v, double radius) {
    if (radius < 0.0) throw std::invalid_argument("project_nuclear_ball: negative radius");
    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s.sum() <= radius) return v;
    const Vector projected = simplex_projection(s, radius);
    return svd.matrixU() * projected.asDiagonal() * svd.matrixV().transpose();
}

Matrix project_nuclear_ball_blocks(const Matrix& v, double radius, int order) {
    check_order(v, order);
    const Eigen::Index block_cols = v.cols() / order;
    Matrix out(v.rows(), v.cols());
    for (int m = 0; m < order; ++m) {
        out.middleCols(m * block_cols, block_cols) =
            project_nuclear_ball(v.middleCols(m * block_cols, block_cols), radius);
    }
    return out;
}

double l1_value(const Matrix& v) { return v.cwiseAbs().sum(); }

double group_lags_value(const Matrix& v, int order) {
    check_order(v, order);
    const Eigen::Index block_cols = v.cols() / order;
    double total = 0.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < block_cols; ++j) {
            double norm_sq = 0.0;
            for (int m = 0; m < order; ++m) {
                const double a = v(i, j + m * block_cols);
                norm_sq += a * a;
            }
            total += std::sqrt(norm_sq);
        }
    }
    return total;
}

double nuclear_value(const Matrix& v) {
    Eigen::JacobiSVD<Matrix> svd(v);
    return svd.singularValues().sum();
}

double nuclear_blocks_value(const Matrix& v, int order) {
    check_order(v, order);
    const Eigen::Index block_cols = v.cols() / order;
    double total = 0.0;
    for (int m = 0; m < order; ++m) {
        total += nuclear_value(v.middleCols(m * block_cols, block_cols));
    }
    return total;
}

double h1_value(const Matrix& A, const RegularizerSpec& reg, int order) {
    switch (reg.h1_kind) {
        case H1Kind::element_l1:
            return reg.lambda_s * l1_value(A);
        case H1Kind::group_l2_across_lags:
            return reg.lambda_s * group_lags_value(A, order);
        case H1Kind::none:
            return 0.0;
    }
    return 0.0;
}

double h2_value(const Matrix& L, const RegularizerSpec& reg, int order) {
    switch (reg.h2_kind) {
        case H2Kind::nuclear_norm:
            return reg.lambda_l * (order > 1 ? nuclear_blocks_value(L, order) : nuclear_value(L));
        case H2Kind::nuclear_ball:
            return 0.0;  // indicator; iterates stay inside the ball
        case H2Kind::none:
            return 0.0;
    }
    return 0.0;
}

Matrix apply_h1_prox(const Matrix& A, const RegularizerSpec& reg, double step, int order) {
    switch (reg.h1_kind) {
        case H1Kind::element_l1:
            return prox_l1(A, step * reg.lambda_s);
        case H1Kind::group_l2_across_lags:
            return prox_group_lags(A, step * reg.lambda_s, order);
        case H1Kind::none:
            return A;
    }
    return A;
}

Matrix apply_h2_prox(const Matrix& L, const RegularizerSpec& reg, double step, int order) {
    switch (reg.h2_kind) {
        case H2Kind::nuclear_norm:
            return order > 1 ? prox_nuclear_blocks(L, step * reg.lambda_l, order)
                             : prox_nuclear(L, step * reg.lambda_l);
        case H2Kind::nuclear_ball:
            return order > 1 ? project_nuclear_ball_blocks(L, reg.lambda_l, order)
                             : project_nuclear_ball(L, reg.lambda_l);
        case H2Kind::none:
            return Matrix::Zero(L.rows(), L.cols());
    }
    return L;
}

}  // namespace silvar::regularizers
