#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "saddleflow/problem.hpp"
#include "saddleflow/schedule.hpp"
#include "saddleflow/types.hpp"

namespace saddleflow {

// The second-order system, written per coordinate block:
//
//   x'' + alpha x' + beta grad_x L_t(x, y + theta t y')
//       + gamma d/dt grad_x L_t(x, y + theta t y') = 0
//   y'' + alpha y' - beta grad_y L_t(x + theta t x', y)
//       - gamma d/dt grad_y L_t(x + theta t x', y) = 0
//
// The total derivatives contain theta*t*K^* y'' and theta*t*K x'', so the
// accelerations are coupled. With c = gamma(t) theta t and the force terms
// M, N collecting everything else, the pair
//
//   x'' + c K^* y'' = M,     y'' - c K x'' = N
//
// resolves to (I + c^2 K^* K) x'' = M - c K^* N and
// (I + c^2 K K^*) y'' = N + c K M. Both coupling operators are symmetric
// positive definite for real c; the primal one is n x n, the dual one m x m.

/// Force terms of the coupled acceleration system.
struct Forces {
    Vec primal;  // M
    Vec dual;    // N
};

/// Time derivative of the first-order state (vx, vy, ax, ay).
struct StateDerivative {
    Vec dx;
    Vec dy;
    Vec ax;
    Vec ay;
};

enum class CouplingSolve { dense, woodbury };

/// Factorization cache for the two coupling operators at the current time.
/// K^T K and K K^T are formed once; a refresh only rescales and refactors.
/// The woodbury mode solves both systems through the m x m factorization,
/// worthwhile when m << n.
class CouplingCache {
  public:
    explicit CouplingCache(const SaddleProblem& p, CouplingSolve mode = CouplingSolve::dense)
        : k_(p.k_dense),
          ktk_(p.k_dense.transpose() * p.k_dense),
          kkt_(p.k_dense * p.k_dense.transpose()),
          mode_(mode) {}

    double cached_c() const { return c_; }
    CouplingSolve mode() const { return mode_; }

    void refresh(double c) {
        c_ = c;
        if (c == 0.0) return;  // both solves are identity pass-throughs
        const double c2 = c * c;
        a_dual_ = c2 * kkt_;
        a_dual_.diagonal().array() += 1.0;
        llt_dual_.compute(a_dual_);
        if (llt_dual_.info() != Eigen::Success) {
            throw std::runtime_error("CouplingCache: dual factorization failed");
        }
        if (mode_ == CouplingSolve::dense) {
            a_primal_ = c2 * ktk_;
            a_primal_.diagonal().array() += 1.0;
            llt_primal_.compute(a_primal_);
            if (llt_primal_.info() != Eigen::Success) {
                throw std::runtime_error("CouplingCache: primal factorization failed");
            }
        }
    }

    /// Solves (I + c^2 K^T K) x = b.
    Vec solve_primal(const Vec& b) const {
        if (c_ == 0.0) return b;
        if (mode_ == CouplingSolve::dense) return refined_solve(llt_primal_, a_primal_, b);
        // (I + c^2 K^T K)^{-1} = I - c^2 K^T (I + c^2 K K^T)^{-1} K
        return b - (c_ * c_) * (k_.transpose() * refined_solve(llt_dual_, a_dual_, k_ * b));
    }

    /// Solves (I + c^2 K K^T) y = b.
    Vec solve_dual(const Vec& b) const {
        if (c_ == 0.0) return b;
        return refined_solve(llt_dual_, a_dual_, b);
    }

    /// Solves the coupled pair ax + c K^T ay = m, ay - c K ax = n.
    /// Refining against the coupled residual keeps the pair equations
    /// satisfied to round-off even when c^2 ||K||^2 makes the individual
    /// operators badly conditioned.
    std::pair<Vec, Vec> solve_coupled(const Vec& m_force, const Vec& n_force) const {
        if (c_ == 0.0) return {m_force, n_force};
        Vec ax = solve_primal(m_force - c_ * (k_.transpose() * n_force));
        Vec ay = solve_dual(n_force + c_ * (k_ * m_force));
        for (int pass = 0; pass < 2; ++pass) {
            const Vec r1 = m_force - ax - c_ * (k_.transpose() * ay);
            const Vec r2 = n_force - ay + c_ * (k_ * ax);
            ax += solve_primal(r1 - c_ * (k_.transpose() * r2));
            ay += solve_dual(r2 + c_ * (k_ * r1));
        }
        return {ax, ay};
    }

  private:
    // One step of iterative refinement keeps the solve residual near machine
    // precision even when c^2 ||K||^2 is large.
    static Vec refined_solve(const Eigen::LLT<Mat>& llt, const Mat& a, const Vec& b) {
        Vec x = llt.solve(b);
        x += llt.solve(b - a * x);
        return x;
    }

    Mat k_;
    Mat ktk_;
    Mat kkt_;
    Mat a_primal_;
    Mat a_dual_;
    Eigen::LLT<Mat> llt_primal_;
    Eigen::LLT<Mat> llt_dual_;
    double c_ = std::numeric_limits<double>::quiet_NaN();
    CouplingSolve mode_;
};

namespace detail {

inline void require_time(double t, const Schedule& s, const char* op) {
    if (t < s.t0) {
        throw std::domain_error(std::string(op) + ": t = " + std::to_string(t) +
                                " below schedule t0 = " + std::to_string(s.t0));
    }
}

}  // namespace detail

/// Assembles the force terms M, N of the coupled acceleration system at
/// time t. Everything except the acceleration coupling lives here.
inline Forces assemble_forces(const SaddleProblem& p, const Schedule& s, double t,
                              const SystemState& state) {
    detail::require_time(t, s, "assemble_forces");
    const double alpha = s.alpha(t).value;
    const double beta = s.beta(t).value;
    const double gamma = s.gamma(t).value;
    const ValueDeriv eps = s.epsilon(t);
    const double theta = s.theta;

    Forces f;
    f.primal = -alpha * state.vx -
               beta * (p.f_grad(state.x) + eps.value * state.x +
                       p.k_adjoint_apply(state.y + theta * t * state.vy));
    if (gamma != 0.0) {
        f.primal -= gamma * (p.f_hess_vec(state.x, state.vx) + eps.deriv * state.x +
                             eps.value * state.vx +
                             (1.0 + theta) * p.k_adjoint_apply(state.vy));
    }

    f.dual = -alpha * state.vy +
             beta * (-p.g_grad(state.y) - eps.value * state.y +
                     p.k_apply(state.x + theta * t * state.vx));
    if (gamma != 0.0) {
        f.dual += gamma * (-p.g_hess_vec(state.y, state.vy) - eps.deriv * state.y -
                           eps.value * state.vy + (1.0 + theta) * p.k_apply(state.vx));
    }
    return f;
}

/// Right-hand side of the first-order reformulation: returns
/// (vx, vy, ax, ay) with the accelerations resolved through the coupling
/// solves. With gamma(t) = 0 the solves are identity pass-throughs.
inline StateDerivative rhs(const SaddleProblem& p, const Schedule& s, double t,
                           const SystemState& state, CouplingCache& cache) {
    detail::require_time(t, s, "rhs");
    const Forces f = assemble_forces(p, s, t, state);
    const double c = s.gamma(t).value * s.theta * t;
    if (cache.cached_c() != c) cache.refresh(c);

    StateDerivative d;
    d.dx = state.vx;
    d.dy = state.vy;
    auto [ax, ay] = cache.solve_coupled(f.primal, f.dual);
    d.ax = std::move(ax);
    d.ay = std::move(ay);
    return d;
}

/// Residual of the original second-order system for given accelerations.
/// This evaluates both equations directly from the gradients and total
/// derivatives, without going through the M/N assembly, so it serves as an
/// independent oracle for rhs().
inline std::pair<Vec, Vec> residual_second_order(const SaddleProblem& p, const Schedule& s,
                                                 double t, const SystemState& state, const Vec& ax,
                                                 const Vec& ay) {
    detail::require_time(t, s, "residual_second_order");
    const double alpha = s.alpha(t).value;
    const double beta = s.beta(t).value;
    const double gamma = s.gamma(t).value;
    const ValueDeriv eps = s.epsilon(t);
    const double theta = s.theta;

    const Vec y_tilde = state.y + theta * t * state.vy;
    const Vec x_tilde = state.x + theta * t * state.vx;

    Vec rx = ax + alpha * state.vx + beta * grad_x_aug(p, state.x, y_tilde, eps.value);
    if (gamma != 0.0) {
        rx += gamma * (p.f_hess_vec(state.x, state.vx) + eps.deriv * state.x +
                       eps.value * state.vx +
                       p.k_adjoint_apply((1.0 + theta) * state.vy + theta * t * ay));
    }

    Vec ry = ay + alpha * state.vy - beta * grad_y_aug(p, x_tilde, state.y, eps.value);
    if (gamma != 0.0) {
        ry -= gamma * (p.k_apply((1.0 + theta) * state.vx + theta * t * ax) -
                       p.g_hess_vec(state.y, state.vy) - eps.deriv * state.y -
                       eps.value * state.vy);
    }
    return {rx, ry};
}

}  // namespace saddleflow
