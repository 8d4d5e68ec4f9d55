#pragma once

#include <Eigen/Core>
#include <utility>

#include "pnc/model.hpp"

namespace pnc {

/// Sum of squared residuals of the columns of `data` against one cone.
/// For 2-row data the stage is the final one: opening must be 0 and the
/// residuals use the signed angle.
double stage_objective(const Eigen::MatrixXd& data, const Eigen::VectorXd& axis,
                       double opening, ResidualKind kind);

struct StageFit {
    HyperconeStage stage;
    StageDiagnostics diagnostics;
};

/// Least-squares stage fit. Intermediate stages (3 or more rows) run
/// Nelder-Mead over hyperspherical axis angles plus the opening, then a
/// damped Gauss-Newton polish; the final 2-row stage minimizes over the
/// axis angle by a 360-point grid with golden-section refinement.
/// Deterministic given (data, config).
StageFit fit_stage(const Eigen::MatrixXd& data, ResidualKind kind,
                   const OptimizerConfig& config);

/// Algorithm: fit stage, record residuals, map down, repeat through the
/// final 2-D stage. Scores come out in reverse-stage column order.
std::pair<PncModel, ScoreMatrix> fit(const Eigen::MatrixXd& data, ResidualKind kind,
                                     const OptimizerConfig& config = {});

/// Scores for data under a frozen model; on the training data this
/// reproduces the fit-time scores exactly (same computation path).
ScoreMatrix transform(const PncModel& model, const Eigen::MatrixXd& data);

/// 2 x n matrix after mapping the data through stages 1..d-1.
Eigen::MatrixXd final_stage_representation(const PncModel& model,
                                           const Eigen::MatrixXd& data);

/// Continuous final-stage representation (r cos(beta), r sin(beta)) with
/// beta the counterclockwise angle from the final axis in [0, 2pi).
PolarScores polar_scores(const PncModel& model, const Eigen::MatrixXd& data_at_final_stage);

/// Per-component share of the total squared score mass; sums to one.
Eigen::VectorXd variance_explained(const ScoreMatrix& scores);

} // namespace pnc
