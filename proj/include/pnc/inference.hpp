#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pnc/model.hpp"

namespace pnc {

/// Product-of-sines chart for unit vectors: the first m-2 angles lie in
/// [0, pi], the last in [0, 2pi). Gives an unconstrained parameterization
/// for optimization and for per-parameter bootstrap intervals.
Eigen::VectorXd to_hyperspherical(const Eigen::VectorXd& v);
Eigen::VectorXd from_hyperspherical(const Eigen::VectorXd& angles);

/// Chart evaluation without range checks; the trigonometric formula extends
/// to any real angles, which is what the unconstrained optimizer walks on.
Eigen::VectorXd hyperspherical_point(const Eigen::VectorXd& angles);

/// d(hyperspherical_point)/d(angles), m x (m-1). Used by the fit polish.
Eigen::MatrixXd hyperspherical_jacobian(const Eigen::VectorXd& angles);

struct BootstrapParameter {
    std::string name;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double normalized_width = 0.0; // width divided by the parameter's range
    bool contains_estimate = true;
};

struct BootstrapSummary {
    std::vector<BootstrapParameter> parameters;
    int replicates = 0;  // requested B
    int skipped = 0;     // replicates whose refit failed
    double level = 0.9;
    std::uint64_t seed = 0;

    double mean_normalized_width() const;
};

/// Percentile bootstrap for the full PNC parameter vector: B resamples with
/// replacement, full refit per resample, axes branch-aligned to the point
/// estimate before summarization. Deterministic given the seed; replicates
/// use independent derived streams.
BootstrapSummary bootstrap(const Eigen::MatrixXd& data, int B, double level,
                           ResidualKind kind, const OptimizerConfig& config,
                           std::uint64_t seed);

/// Parameter names for a model of the given ambient dimension, in summary
/// order: theta_k_j for each stage axis, then alpha_1..alpha_{d-1}.
std::vector<std::string> parameter_names(int ambient_dim);

/// Flattened (angles, openings) vector for a fitted model, with every axis
/// branch-aligned against `reference` when given.
Eigen::VectorXd flatten_parameters(const PncModel& model, const PncModel* reference);

/// Range of each flattened parameter (pi, 2pi or pi/2), for width normalization.
Eigen::VectorXd parameter_ranges(int ambient_dim);

} // namespace pnc
