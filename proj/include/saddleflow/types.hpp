#pragma once

#include <Eigen/Dense>

namespace saddleflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// First-order state of the dynamics: positions (x, y) and velocities (vx, vy).
struct SystemState {
    Vec x;   // primal position
    Vec y;   // dual position
    Vec vx;  // primal velocity
    Vec vy;  // dual velocity

    bool all_finite() const {
        return x.allFinite() && y.allFinite() && vx.allFinite() && vy.allFinite();
    }

    /// Flattened layout [x; y; vx; vy], matching the first-order reformulation.
    Vec pack() const {
        Vec out(x.size() + y.size() + vx.size() + vy.size());
        out << x, y, vx, vy;
        return out;
    }

    static SystemState unpack(const Vec& flat, Eigen::Index n, Eigen::Index m) {
        SystemState s;
        s.x = flat.segment(0, n);
        s.y = flat.segment(n, m);
        s.vx = flat.segment(n + m, n);
        s.vy = flat.segment(2 * n + m, m);
        return s;
    }
};

}  // namespace saddleflow
