#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "saddleflow/types.hpp"

namespace saddleflow {

/// Oracle bundle for a convex-concave bilinear saddle problem
///
///     min_x max_y  L(x, y) = f(x) + <Kx, y> - g(y)
///
/// with f, g convex and twice continuously differentiable. Hessians enter
/// only through Hessian-vector products. The dense K is kept alongside the
/// operator oracles because the coupled acceleration solves need it
/// explicitly.
struct SaddleProblem {
    Eigen::Index n = 0;  // primal dimension
    Eigen::Index m = 0;  // dual dimension

    std::function<double(const Vec&)> f_value;
    std::function<Vec(const Vec&)> f_grad;
    std::function<Vec(const Vec&, const Vec&)> f_hess_vec;  // (x, v) -> Hf(x) v

    std::function<double(const Vec&)> g_value;
    std::function<Vec(const Vec&)> g_grad;
    std::function<Vec(const Vec&, const Vec&)> g_hess_vec;  // (y, v) -> Hg(y) v

    std::function<Vec(const Vec&)> k_apply;          // x -> Kx
    std::function<Vec(const Vec&)> k_adjoint_apply;  // y -> K* y

    Mat k_dense;  // m x n
};

/// Constants (m, n, j, k) of the quadratic min-max family
/// f(x) = (m x1 + n x2)^2, g(y) = (j y1 + k y2)^2, K = (j,k)^T (m,n).
struct BilinearQuadraticParams {
    double m_c;
    double n_c;
    double j_c;
    double k_c;
};

/// Parameters of the l2-regularized least-squares family
/// Phi(x) = 1/2 ||Kx - b||^2 + omega ||x||^2.
struct L2RegularizedParams {
    Mat k_matrix;
    Vec b;
    double omega;
};

enum class ProblemFamily { bilinear_quadratic, l2_regularized };

namespace detail {

inline void require_dims(const SaddleProblem& p, const Vec& x, const Vec& y, const char* op) {
    if (x.size() != p.n || y.size() != p.m) {
        throw std::invalid_argument(std::string(op) + ": dimension mismatch (expected " +
                                    std::to_string(p.n) + "+" + std::to_string(p.m) + ", got " +
                                    std::to_string(x.size()) + "+" + std::to_string(y.size()) +
                                    ")");
    }
}

}  // namespace detail

/// L(x, y) = f(x) + <Kx, y> - g(y)
inline double lagrangian(const SaddleProblem& p, const Vec& x, const Vec& y) {
    detail::require_dims(p, x, y, "lagrangian");
    return p.f_value(x) + p.k_apply(x).dot(y) - p.g_value(y);
}

/// L_t(x, y) = L(x, y) + eps/2 (||x||^2 - ||y||^2)
inline double augmented_lagrangian(const SaddleProblem& p, const Vec& x, const Vec& y,
                                   double eps) {
    detail::require_dims(p, x, y, "augmented_lagrangian");
    if (eps < 0.0) throw std::invalid_argument("augmented_lagrangian: eps must be >= 0");
    return lagrangian(p, x, y) + 0.5 * eps * (x.squaredNorm() - y.squaredNorm());
}

/// grad_x L_t(x, y_tilde) = grad f(x) + K* y_tilde + eps x.
/// The caller supplies the already-extrapolated dual argument y_tilde.
inline Vec grad_x_aug(const SaddleProblem& p, const Vec& x, const Vec& y_tilde, double eps) {
    detail::require_dims(p, x, y_tilde, "grad_x_aug");
    return p.f_grad(x) + p.k_adjoint_apply(y_tilde) + eps * x;
}

/// grad_y L_t(x_tilde, y) = K x_tilde - grad g(y) - eps y.
inline Vec grad_y_aug(const SaddleProblem& p, const Vec& x_tilde, const Vec& y, double eps) {
    detail::require_dims(p, x_tilde, y, "grad_y_aug");
    return p.k_apply(x_tilde) - p.g_grad(y) - eps * y;
}

/// Builds the 2x2 quadratic min-max family. K assembles as the outer product
/// c a^T with a = (m, n) and c = (j, k), so the solution set is
/// {a.x = 0, c.y = 0} and the minimal-norm saddle point is the origin.
inline SaddleProblem make_bilinear_quadratic(const BilinearQuadraticParams& params) {
    if (params.m_c == 0.0 || params.n_c == 0.0 || params.j_c == 0.0 || params.k_c == 0.0) {
        throw std::invalid_argument("make_bilinear_quadratic: all four constants must be nonzero");
    }
    Vec a(2), c(2);
    a << params.m_c, params.n_c;
    c << params.j_c, params.k_c;

    SaddleProblem p;
    p.n = 2;
    p.m = 2;
    p.k_dense = c * a.transpose();

    p.f_value = [a](const Vec& x) { double s = a.dot(x); return s * s; };
    p.f_grad = [a](const Vec& x) -> Vec { return 2.0 * a.dot(x) * a; };
    p.f_hess_vec = [a](const Vec&, const Vec& v) -> Vec { return 2.0 * a.dot(v) * a; };

    p.g_value = [c](const Vec& y) { double s = c.dot(y); return s * s; };
    p.g_grad = [c](const Vec& y) -> Vec { return 2.0 * c.dot(y) * c; };
    p.g_hess_vec = [c](const Vec&, const Vec& v) -> Vec { return 2.0 * c.dot(v) * c; };

    const Mat k = p.k_dense;
    p.k_apply = [k](const Vec& x) -> Vec { return k * x; };
    p.k_adjoint_apply = [k](const Vec& y) -> Vec { return k.transpose() * y; };
    return p;
}

/// Builds the saddle form of the l2-regularized problem:
/// f(x) = omega ||x||^2, g(y) = 1/2 ||y||^2 + <b, y>, so that
/// L(x, y) = omega ||x||^2 + <Kx - b, y> - 1/2 ||y||^2.
inline SaddleProblem make_l2_regularized(const L2RegularizedParams& params) {
    if (!(params.omega > 0.0)) {
        throw std::invalid_argument("make_l2_regularized: omega must be > 0");
    }
    if (params.b.size() != params.k_matrix.rows()) {
        throw std::invalid_argument("make_l2_regularized: b length must match rows of K");
    }

    SaddleProblem p;
    p.n = params.k_matrix.cols();
    p.m = params.k_matrix.rows();
    p.k_dense = params.k_matrix;

    const double omega = params.omega;
    p.f_value = [omega](const Vec& x) { return omega * x.squaredNorm(); };
    p.f_grad = [omega](const Vec& x) -> Vec { return 2.0 * omega * x; };
    p.f_hess_vec = [omega](const Vec&, const Vec& v) -> Vec { return 2.0 * omega * v; };

    const Vec b = params.b;
    p.g_value = [b](const Vec& y) { return 0.5 * y.squaredNorm() + b.dot(y); };
    p.g_grad = [b](const Vec& y) -> Vec { return y + b; };
    p.g_hess_vec = [](const Vec&, const Vec& v) -> Vec { return v; };

    const Mat k = p.k_dense;
    p.k_apply = [k](const Vec& x) -> Vec { return k * x; };
    p.k_adjoint_apply = [k](const Vec& y) -> Vec { return k.transpose() * y; };
    return p;
}

/// Minimal-norm saddle point of a built-in family.
///
/// Bilinear-quadratic: the origin. l2: the saddle is unique, x* solves
/// (K^T K + 2 omega I) x = K^T b and y* = K x* - b.
inline std::pair<Vec, Vec> reference_saddle(const SaddleProblem& p, ProblemFamily family) {
    switch (family) {
        case ProblemFamily::bilinear_quadratic:
            return {Vec::Zero(p.n), Vec::Zero(p.m)};
        case ProblemFamily::l2_regularized: {
            const Mat& k = p.k_dense;
            // 2*omega recovered from the f Hessian; f_hess_vec is x-independent here.
            const double two_omega = p.f_hess_vec(Vec::Zero(p.n), Vec::Unit(p.n, 0))(0);
            Mat lhs = k.transpose() * k + two_omega * Mat::Identity(p.n, p.n);
            // g_grad(0) = b for this family.
            const Vec b = p.g_grad(Vec::Zero(p.m));
            Eigen::LLT<Mat> llt(lhs);
            if (llt.info() != Eigen::Success) {
                throw std::runtime_error("reference_saddle: normal-equation solve failed");
            }
            Vec x_star = llt.solve(k.transpose() * b);
            Vec y_star = k * x_star - b;
            return {x_star, y_star};
        }
    }
    throw std::invalid_argument("reference_saddle: unknown problem family");
}

/// Norms of the two first-order optimality residuals
/// (grad f(x*) + K* y*, K x* - grad g(y*)) of a candidate saddle point.
inline std::pair<double, double> optimality_residuals(const SaddleProblem& p, const Vec& x_star,
                                                      const Vec& y_star) {
    detail::require_dims(p, x_star, y_star, "optimality_residuals");
    const double rx = (p.f_grad(x_star) + p.k_adjoint_apply(y_star)).norm();
    const double ry = (p.k_apply(x_star) - p.g_grad(y_star)).norm();
    return {rx, ry};
}

/// Phi(x) = 1/2 ||Kx - b||^2 + omega ||x||^2
inline double objective_phi(const L2RegularizedParams& params, const Vec& x) {
    if (x.size() != params.k_matrix.cols()) {
        throw std::invalid_argument("objective_phi: dimension mismatch");
    }
    return 0.5 * (params.k_matrix * x - params.b).squaredNorm() + params.omega * x.squaredNorm();
}

}  // namespace saddleflow
