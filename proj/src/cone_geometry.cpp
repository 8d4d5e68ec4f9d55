#include "pnc/cone_geometry.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pnc {

namespace {

std::atomic<std::uint64_t> g_degenerate_count{0};

constexpr double kPi = std::numbers::pi;

} // namespace

std::uint64_t degenerate_alignment_count() { return g_degenerate_count.load(); }
void reset_degenerate_alignment_count() { g_degenerate_count.store(0); }

ConePoint::ConePoint(Eigen::VectorXd x) : ambient(std::move(x)) {
    if (ambient.size() < 1) {
        throw DimensionError("ConePoint needs a nonempty ambient vector");
    }
    size = ambient.norm();
    if (size >= kApexTol) {
        direction = ambient / size;
    } else {
        direction = Eigen::VectorXd::Zero(ambient.size());
    }
}

HyperconeStage::HyperconeStage(Eigen::VectorXd v, double alpha)
    : axis(std::move(v)), opening(alpha) {
    if (std::abs(axis.norm() - 1.0) > 1e-10) {
        throw DomainError("hypercone axis must have unit norm");
    }
    if (opening < 0.0 || opening > kPi / 2) {
        throw DomainError("opening angle must lie in [0, pi/2]");
    }
}

void detail::require_not_apex(double size, const char* op) {
    if (size < kApexTol) {
        std::ostringstream msg;
        msg << op << ": the apex has no direction (size " << size << " < " << kApexTol << ")";
        throw ApexError(msg.str());
    }
}

Eigen::VectorXd detail::degenerate_direction(const Eigen::VectorXd& unit_dir,
                                             const Eigen::VectorXd& axis) {
    (void)unit_dir;
    g_degenerate_count.fetch_add(1);
    const Eigen::Index m = axis.size();
    // First standard basis vector with a usable component orthogonal to the
    // axis. Mixing it into an (anti-)aligned direction with weight kAlignTol
    // leaves exactly this vector as the base component, so downstream
    // projection and mapping use it directly.
    Eigen::VectorXd probe = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        e(j) = 1.0;
        probe = e - e.dot(axis) * axis;
        if (probe.norm() > 0.5) break;
    }
    probe.normalize();
    return probe;
}

double cone_distance(double size1, double size2, double base_distance) {
    if (size1 < 0.0 || size2 < 0.0) {
        throw DomainError("cone_distance: sizes must be nonnegative");
    }
    if (base_distance < 0.0 || base_distance > kPi) {
        std::ostringstream msg;
        msg << "cone_distance: base distance " << base_distance << " outside [0, pi]";
        throw DomainError(msg.str());
    }
    const double sq = size1 * size1 + size2 * size2
                    - 2.0 * size1 * size2 * std::cos(base_distance);
    return std::sqrt(sq < 0.0 ? 0.0 : sq);
}

double hypercone_geodesic_distance(const ConePoint& p, const ConePoint& q, double opening) {
    if (opening < 0.0 || opening > kPi / 2) {
        throw DomainError("hypercone_geodesic_distance: opening outside [0, pi/2]");
    }
    // The apex has no direction: a pair involving it separates radially only.
    if (p.is_apex() || q.is_apex()) {
        return cone_distance(p.size, q.size, 0.0);
    }
    const double s = std::sin(opening);
    double theta = 0.0;
    if (s > 0.0) {
        // Both points share the cone, so the base-sphere angle between their
        // angular components follows from cos(psi) = cos^2(a) + sin^2(a) cos(Theta).
        const double c = std::cos(opening);
        const double psi_cos = clamp_unit(p.direction.dot(q.direction));
        theta = std::acos(clamp_unit((psi_cos - c * c) / (s * s)));
    }
    return cone_distance(p.size, q.size, s * theta);
}

Eigen::VectorXd flatten_to_sector(const ConePoint& p, const Eigen::VectorXd& axis,
                                  double opening) {
    detail::require_not_apex(p.size, "flatten_to_sector");
    const Eigen::Index m = p.dim();
    if (axis.size() != m) {
        throw DimensionError("flatten_to_sector: axis/point dimension mismatch");
    }
    const double theta = stable_angle(p.direction, axis, p.direction.dot(axis));
    if (std::abs(theta - opening) > 1e-8) {
        std::ostringstream msg;
        msg << "flatten_to_sector: point is not on the cone (angle to axis " << theta
            << ", opening " << opening << ")";
        throw NotOnConeError(msg.str());
    }

    // Angular component on the base sphere, in the rotated frame where the
    // axis is the last coordinate.
    const Eigen::MatrixXd rot = rodrigues_rotation(axis);
    Eigen::VectorXd z = rot * p.direction;
    Eigen::VectorXd base = z.head(m - 1);
    const double base_norm = base.norm();
    if (base_norm < kAlignTol) {
        // On-axis point (opening ~ 0): the sector image is the reference ray.
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m - 1);
        out(0) = p.size;
        return out;
    }
    base /= base_norm;

    const double s = std::sin(opening);
    if (m == 2) {
        Eigen::VectorXd out(1);
        out(0) = p.size * base(0);
        return out;
    }

    // Spherical chart angles of the base direction, each scaled by sin(opening).
    const Eigen::Index k = m - 1;
    Eigen::VectorXd angles(k - 1);
    for (Eigen::Index j = 0; j + 2 < k; ++j) {
        angles(j) = std::atan2(base.tail(k - 1 - j).norm(), base(j));
    }
    double last = std::atan2(base(k - 1), base(k - 2));
    if (last < 0.0) last += 2.0 * kPi;
    angles(k - 2) = last;

    Eigen::VectorXd out(k);
    double sines = 1.0;
    for (Eigen::Index j = 0; j + 1 < k; ++j) {
        const double a = s * angles(j);
        out(j) = p.size * sines * std::cos(a);
        sines *= std::sin(a);
    }
    out(k - 1) = p.size * sines;
    return out;
}

ConePoint project_to_cone(const ConePoint& x, const HyperconeStage& stage) {
    detail::require_not_apex(x.size, "project_to_cone");
    if (x.dim() != stage.axis.size()) {
        throw DimensionError("project_to_cone: axis/point dimension mismatch");
    }
    const double alpha = stage.opening;
    const double theta = stable_angle(x.direction, stage.axis, x.direction.dot(stage.axis));
    if (theta <= kAlignTol || theta >= kPi - kAlignTol) {
        // (Anti-)aligned observation: the perturbed direction's base
        // component is the fallback vector, so the projection is the
        // on-cone point above it.
        const Eigen::VectorXd base = detail::degenerate_direction(x.direction, stage.axis);
        return ConePoint(x.size * (std::cos(alpha) * stage.axis + std::sin(alpha) * base));
    }
    Eigen::VectorXd unit =
        (std::sin(alpha) * x.direction + std::sin(theta - alpha) * stage.axis) /
        std::sin(theta);
    return ConePoint(x.size * unit);
}

double residual(const ConePoint& x, const HyperconeStage& stage, ResidualKind kind) {
    detail::require_not_apex(x.size, "residual");
    if (x.dim() != stage.axis.size()) {
        throw DimensionError("residual: axis/point dimension mismatch");
    }
    const double theta = stable_angle(x.direction, stage.axis, x.direction.dot(stage.axis));
    const double dev = theta - stage.opening;
    return kind == ResidualKind::Riemannian ? dev * x.size
                                            : 2.0 * std::sin(dev / 2.0) * x.size;
}

double signed_angle_2d(const ConePoint& x, const Eigen::VectorXd& axis) {
    detail::require_not_apex(x.size, "signed_angle_2d");
    if (x.dim() != 2 || axis.size() != 2) {
        throw DimensionError("signed_angle_2d needs 2-D inputs");
    }
    const double det = axis(0) * x.ambient(1) - axis(1) * x.ambient(0);
    return std::atan2(det, x.ambient.dot(axis));
}

Eigen::MatrixXd rodrigues_rotation(const Eigen::VectorXd& axis) {
    const Eigen::Index m = axis.size();
    if (m < 2) {
        throw DimensionError("rodrigues_rotation needs dimension >= 2");
    }
    if (std::abs(axis.norm() - 1.0) > 1e-10) {
        throw DomainError("rodrigues_rotation: axis must have unit norm");
    }
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(m, m);
    const double vm = axis(m - 1);
    if (1.0 - vm < 1e-15) {
        return rot; // already aligned with e_m
    }
    if (1.0 + vm < 1e-15) {
        // Anti-aligned: c is undefined; rotate by pi in the (e_1, e_m) plane.
        rot(0, 0) = -1.0;
        rot(m - 1, m - 1) = -1.0;
        return rot;
    }
    const double gamma = std::acos(clamp_unit(vm));
    Eigen::VectorXd c = axis;
    c(m - 1) -= vm;
    c /= c.norm();
    Eigen::VectorXd em = Eigen::VectorXd::Zero(m);
    em(m - 1) = 1.0;
    rot += std::sin(gamma) * (em * c.transpose() - c * em.transpose());
    rot += (std::cos(gamma) - 1.0) * (em * em.transpose() + c * c.transpose());
    return rot;
}

ConePoint map_down(const ConePoint& x, const Eigen::VectorXd& axis) {
    detail::require_not_apex(x.size, "map_down");
    if (x.dim() != axis.size()) {
        throw DimensionError("map_down: axis/point dimension mismatch");
    }
    const Eigen::MatrixXd rot = rodrigues_rotation(axis);
    Eigen::VectorXd dir = x.direction;
    const double theta = stable_angle(dir, axis, dir.dot(axis));
    if (theta <= kAlignTol || theta >= kPi - kAlignTol) {
        dir = detail::degenerate_direction(dir, axis);
    }
    Eigen::VectorXd head = (rot * dir).head(x.dim() - 1);
    return ConePoint(x.size / head.norm() * head);
}

Eigen::MatrixXd map_down_columns(const Eigen::MatrixXd& data, const Eigen::VectorXd& axis) {
    const Eigen::Index m = data.rows();
    if (axis.size() != m) {
        throw DimensionError("map_down_columns: axis/data dimension mismatch");
    }
    const Eigen::MatrixXd rot = rodrigues_rotation(axis);
    Eigen::MatrixXd out(m - 1, data.cols());
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
        const double r = data.col(i).norm();
        detail::require_not_apex(r, "map_down");
        Eigen::VectorXd dir = data.col(i) / r;
        const double theta = stable_angle(dir, axis, dir.dot(axis));
        if (theta <= kAlignTol || theta >= kPi - kAlignTol) {
            dir = detail::degenerate_direction(dir, axis);
        }
        Eigen::VectorXd head = (rot * dir).head(m - 1);
        out.col(i) = r / head.norm() * head;
    }
    return out;
}

double stable_angle(const Eigen::VectorXd& unit_dir, const Eigen::VectorXd& axis,
                    double cosine) {
    if (std::abs(cosine) < 0.99) {
        return std::acos(clamp_unit(cosine));
    }
    const double perp = (unit_dir - cosine * axis).norm();
    const double theta = std::atan2(perp, std::abs(cosine));
    return cosine >= 0.0 ? theta : kPi - theta;
}

Eigen::VectorXd angles_to_axis(const Eigen::MatrixXd& unit_directions,
                               const Eigen::VectorXd& axis) {
    const Eigen::VectorXd cosines = unit_directions.transpose() * axis;
    Eigen::VectorXd out(cosines.size());
    for (Eigen::Index i = 0; i < cosines.size(); ++i) {
        out(i) = stable_angle(unit_directions.col(i), axis, cosines(i));
    }
    return out;
}

} // namespace pnc
