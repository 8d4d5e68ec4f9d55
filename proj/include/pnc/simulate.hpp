#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pnc/model.hpp"

namespace pnc {

/// One sampling region on a 3-D cone surface (axis e_3 by convention).
struct RegionSpec {
    double opening = 0.0;
    double r_lo = 0.0, r_hi = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;
    int count = 0;

    void validate() const;
};

/// The three regions of the region-sampling design at a common opening:
/// small radii over [0, pi], large radii over [0, pi], large radii over
/// [pi, 2pi].
std::vector<RegionSpec> three_region_design(double opening, int per_region);

struct LabeledData {
    Eigen::MatrixXd data; // 3 x n
    std::vector<int> labels;
};

/// Uniform independent (r, theta) draws per region, embedded on the cone
/// surface; labels are 1-based region indices.
LabeledData sample_cone_regions(const std::vector<RegionSpec>& regions, std::uint64_t seed);

/// Evenly spaced (r, theta) along a spiral on the cone surface.
Eigen::MatrixXd sample_spiral(double opening, std::pair<double, double> r_range,
                              std::pair<double, double> theta_range, int n);

/// Truncated-normal residual law for one stage. Standard deviation and
/// truncation bound optionally scale with the realized observation size.
struct ResidualLaw {
    double sd = 1.0;
    bool sd_scales_with_size = false;
    double bound = 0.0;
    bool bound_scales_with_size = false;
};

/// Full generative model: cone parameters plus size and residual laws.
/// Sampling draws sizes and per-stage residuals, then back-fits.
struct GeneratorSpec {
    std::vector<Eigen::VectorXd> axes; // stage order, shrinking lengths
    std::vector<double> openings;      // stages 1..d-1
    double size_lo = 1.0, size_hi = 1.0;
    std::vector<ResidualLaw> residual_laws; // stage order 1..d
    int count = 0;
    std::uint64_t seed = 0;

    PncModel to_model(ResidualKind kind = ResidualKind::Riemannian) const;
    void validate() const;
};

/// The generator used for the convergence and bootstrap designs: d = 3,
/// axes (0.5,0.5,0.5,0.5) / (1,1,1)/sqrt3 / (1,1)/sqrt2, openings
/// (pi/6, pi/4), sizes U(10,20), truncated-normal residuals per stage.
GeneratorSpec table_design(int n, std::uint64_t seed);

Eigen::MatrixXd sample_from_model(const GeneratorSpec& spec);

/// I.i.d. centered Gaussian noise per coordinate; apex-adjacent results are
/// redrawn a bounded number of times.
Eigen::MatrixXd add_ambient_noise(const Eigen::MatrixXd& data, double sigma,
                                  std::uint64_t seed);

std::string generator_spec_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const std::string& text);

} // namespace pnc
