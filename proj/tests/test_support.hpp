#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "pnc/cone_geometry.hpp"
#include "pnc/rng.hpp"

namespace pnc::testing {

inline constexpr double kPi = std::numbers::pi;

inline Eigen::VectorXd random_unit(Rng& rng, Eigen::Index m) {
    Eigen::VectorXd v(m);
    do {
        for (Eigen::Index j = 0; j < m; ++j) v(j) = rng.normal();
    } while (v.norm() < 1e-8);
    return v / v.norm();
}

/// Unit vector orthogonal to `axis`.
inline Eigen::VectorXd random_orthogonal_unit(Rng& rng, const Eigen::VectorXd& axis) {
    Eigen::VectorXd w(axis.size());
    for (;;) {
        for (Eigen::Index j = 0; j < axis.size(); ++j) w(j) = rng.normal();
        w -= w.dot(axis) * axis;
        const double norm = w.norm();
        if (norm > 1e-8) return w / norm;
    }
}

/// Point of size r on the cone C(axis, opening) with a random base direction.
inline Eigen::VectorXd random_on_cone(Rng& rng, const Eigen::VectorXd& axis, double opening,
                                      double r) {
    const Eigen::VectorXd w = random_orthogonal_unit(rng, axis);
    return r * (std::cos(opening) * axis + std::sin(opening) * w);
}

/// On-cone point with a prescribed base direction (unit, orthogonal to axis).
inline Eigen::VectorXd on_cone(const Eigen::VectorXd& axis, const Eigen::VectorXd& base,
                               double opening, double r) {
    return r * (std::cos(opening) * axis + std::sin(opening) * base);
}

inline double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::acos(pnc::clamp_unit(a.dot(b) / (a.norm() * b.norm())));
}

/// Random data cloud scattered around a cone: on-cone points with angular
/// jitter, safe for fitting (no apex, no axis alignment).
inline Eigen::MatrixXd random_cone_cloud(Rng& rng, Eigen::Index m, Eigen::Index n,
                                         double opening, double jitter) {
    const Eigen::VectorXd axis = random_unit(rng, m);
    Eigen::MatrixXd data(m, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double theta = opening + rng.uniform(-jitter, jitter);
        const Eigen::VectorXd w = random_orthogonal_unit(rng, axis);
        const double r = rng.uniform(0.5, 3.0);
        data.col(i) = r * (std::cos(theta) * axis + std::sin(theta) * w);
    }
    return data;
}

} // namespace pnc::testing
