#pragma once

#include <Eigen/Core>
#include <vector>

#include "pnc/model.hpp"

namespace pnc {

/// Inputs for inversion: the n x d score matrix, the target sizes, and how
/// many leading (most informative) score columns to keep. Columns
/// keep+1..d are zeroed before inversion.
struct ReconstructionRequest {
    Eigen::MatrixXd scores;
    Eigen::VectorXd sizes;
    int keep = 0;
};

/// Exact stagewise inversion: recover residuals from scores, invert the
/// final 2-D stage, then unwind stages d-1..1. With keep = d this
/// reproduces the fitted data up to roundoff.
Eigen::MatrixXd backfit(const PncModel& model, const ReconstructionRequest& req);

/// Inversion from per-stage residuals (columns in stage order 1..d).
/// This is the core the score-based entry point and the simulation
/// generator both drive.
Eigen::MatrixXd reconstruct_from_residuals(const PncModel& model,
                                           const Eigen::MatrixXd& stage_residuals,
                                           const Eigen::VectorXd& sizes);

/// Angular increment used in place of xi/r when the residuals are chordal.
double chordal_residual_adjust(double xi, double size);

/// Back-fit with all scores zero at the mean of the given sizes: the sample
/// mean size-and-shape, a single ambient vector.
Eigen::VectorXd mean_size_and_shape(const PncModel& model, const Eigen::VectorXd& sizes);

/// Sweep one score column over the given values (all other scores zero,
/// size fixed) and back-fit the trajectory; column is 1-based.
Eigen::MatrixXd score_path(const PncModel& model, double size, int column,
                           const std::vector<double>& values);

} // namespace pnc
