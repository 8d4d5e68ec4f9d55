#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pnc/cone_geometry.hpp"

namespace pnc {

struct StageDiagnostics {
    double objective = 0.0; // sum of squared residuals at the fitted stage
    int iterations = 0;
    bool converged = true;
};

/// Optimizer knobs for stagewise fitting.
struct OptimizerConfig {
    int max_iters = 500;   // simplex iterations per stage
    double tol = 1e-10;    // absolute tolerance on the size-normalized objective
    int restarts = 1;      // total attempts; attempts beyond the first jitter the start
    std::uint64_t seed = 0;

    void validate() const;
};

/// The fitted nested-cone sequence. Stage k (1-based) has an axis of length
/// d+2-k; the last stage is a 2-vector axis with opening exactly 0.
struct PncModel {
    int ambient_dim = 0; // d+1
    std::vector<HyperconeStage> stages;
    ResidualKind residual_kind = ResidualKind::Riemannian;
    std::vector<StageDiagnostics> fit_diagnostics;

    int d() const { return ambient_dim - 1; }

    /// dim(Phi) = d(d+5)/2 - 1: axis coordinates plus the d-1 free openings.
    int free_parameter_count() const;

    /// Positive angle of the final-stage axis against (1, 0), cached at
    /// construction/load time and reused by every back-fit.
    double final_reference_angle() const { return final_reference_angle_; }

    /// Scale factor for stage k (1-based): product of sin(opening) over
    /// stages before k. Stage 1 gets the empty product 1.
    double scale_factor(int stage) const;

    /// Checks stage shapes and ranges, then caches the final reference angle.
    /// Call after assembling or mutating the stages.
    void finalize();

private:
    double final_reference_angle_ = 0.0;
};

/// n x d score matrix in reverse-stage column order (column 1 from stage d)
/// plus the observation sizes and the per-stage scale factors.
struct ScoreMatrix {
    Eigen::MatrixXd scores;
    Eigen::VectorXd sizes;
    Eigen::VectorXd scale_factors; // indexed by stage, 0-based

    Eigen::Index n() const { return scores.rows(); }
    Eigen::Index d() const { return scores.cols(); }
};

struct PolarScores {
    Eigen::VectorXd sx;
    Eigen::VectorXd sy;
};

std::string residual_kind_name(ResidualKind kind);
ResidualKind residual_kind_from_name(const std::string& name);

/// JSON round trip for fitted models; doubles are emitted as shortest
/// round-trip decimals so serialize -> parse is bit-faithful.
std::string model_to_json(const PncModel& model);
PncModel model_from_json(const std::string& text);

} // namespace pnc
