#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "pnc/errors.hpp"

namespace pnc {

/// Sizes below this are treated as the cone apex, which is a singular point:
/// it has no direction and is rejected by all angular operations.
inline constexpr double kApexTol = 1e-12;

/// Angles to the axis closer than this to 0 or pi are handled by the
/// deterministic perturbation fallback (see degenerate_direction).
inline constexpr double kAlignTol = 1e-9;

/// Openings are kept strictly below pi/2 - kOpeningGuard during fitting; at
/// pi/2 the cones for v and -v coincide and the axis is unidentifiable.
inline constexpr double kOpeningGuard = 1e-6;

enum class ResidualKind { Riemannian, Chordal };

/// An ambient-space observation with its derived radial coordinate (size)
/// and unit direction. The apex (size 0) is representable; angular
/// operations reject it.
struct ConePoint {
    Eigen::VectorXd ambient;
    double size = 0.0;
    Eigen::VectorXd direction;

    ConePoint() = default;
    explicit ConePoint(Eigen::VectorXd x);

    bool is_apex() const { return size < kApexTol; }
    Eigen::Index dim() const { return ambient.size(); }
};

/// One nested cone: unit axis and opening angle in [0, pi/2].
struct HyperconeStage {
    Eigen::VectorXd axis;
    double opening = 0.0;

    HyperconeStage() = default;
    HyperconeStage(Eigen::VectorXd v, double alpha);
};

inline double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

/// Number of times the degenerate-alignment fallback fired since process
/// start (observations aligned or anti-aligned with a stage axis).
std::uint64_t degenerate_alignment_count();
void reset_degenerate_alignment_count();

/// Cone metric between (size1, x) and (size2, y) where base_distance is the
/// metric-space distance between x and y, required to lie in [0, pi].
double cone_distance(double size1, double size2, double base_distance);

/// Intrinsic geodesic distance between two points of a common hypercone with
/// the given opening. The base-sphere separation is recovered from the
/// points themselves; an apex argument contributes no angle.
double hypercone_geodesic_distance(const ConePoint& p, const ConePoint& q, double opening);

/// Unrolls a point of the cone about `axis` into the flattened hypersector
/// (all base chart angles scaled by sin(opening)). The image keeps the
/// point's norm; straight-line distances in the sector realize geodesic
/// distances for pairs whose connecting geodesic stays inside one chart
/// leaf: any pair when m = 3 and the chart gap is at most pi, and pairs on
/// a common chart meridian for m > 3 (the slice the flattening argument of
/// the geodesic-length formula is run in).
Eigen::VectorXd flatten_to_sector(const ConePoint& p, const Eigen::VectorXd& axis,
                                  double opening);

/// SLERP projection of x onto the cone: same size, same base direction,
/// angle to the axis moved to the opening.
ConePoint project_to_cone(const ConePoint& x, const HyperconeStage& stage);

/// Signed size-weighted distance between x and its cone projection;
/// negative inside the cone, positive outside.
double residual(const ConePoint& x, const HyperconeStage& stage, ResidualKind kind);

/// Signed angle in (-pi, pi] from a 2-D axis to a 2-D observation,
/// counterclockwise positive.
double signed_angle_2d(const ConePoint& x, const Eigen::VectorXd& axis);

/// Rotation taking `axis` to the last standard basis vector e_m.
/// axis = e_m yields the identity; axis = -e_m rotates by pi in the
/// (e_1, e_m) plane.
Eigen::MatrixXd rodrigues_rotation(const Eigen::VectorXd& axis);

/// Dimension-reducing map: rotate axis to e_m, drop the last coordinate,
/// rescale back to the input norm.
ConePoint map_down(const ConePoint& x, const Eigen::VectorXd& axis);

// Column-batch core used by the fitting pipeline. Columns are observations;
// degenerate-alignment fallback applies per column.
Eigen::MatrixXd map_down_columns(const Eigen::MatrixXd& data, const Eigen::VectorXd& axis);

/// Angle in [0, pi] between a unit direction and a unit axis. Uses the
/// clamped arccosine away from the poles and the explicit perpendicular
/// component near them, where arccos loses half the mantissa.
double stable_angle(const Eigen::VectorXd& unit_dir, const Eigen::VectorXd& axis,
                    double cosine);

/// Angles between unit-direction columns and a unit axis.
Eigen::VectorXd angles_to_axis(const Eigen::MatrixXd& unit_directions,
                               const Eigen::VectorXd& axis);

namespace detail {
// Fallback base direction for observations aligned/anti-aligned with the
// axis: the first standard basis vector orthogonalized against the axis
// (the base component left after mixing it in with weight kAlignTol).
// Increments the warning counter.
Eigen::VectorXd degenerate_direction(const Eigen::VectorXd& unit_dir,
                                     const Eigen::VectorXd& axis);
void require_not_apex(double size, const char* op);
} // namespace detail

} // namespace pnc
