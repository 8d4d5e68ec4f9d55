#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "pnc/backfit.hpp"
#include "pnc/model.hpp"

namespace pnc {

/// Tangent-space PCA frame at the normalized mean direction. The mean
/// direction and the principal directions are mutually orthonormal and
/// together span the reduced (p+1)-dimensional space.
struct PcaTransform {
    Eigen::VectorXd mean_direction; // unit, length d+1
    Eigen::MatrixXd directions;     // (d+1) x p, orthonormal, each orthogonal to the mean
    int p = 0;
    int effective_p = 0; // directions with non-null eigenvalues

    Eigen::Index ambient_dim() const { return mean_direction.size(); }
};

struct FastPncModel {
    PcaTransform pca;
    PncModel inner; // fitted on the (p+1)-dimensional representation
};

/// Maps each observation to tangent coordinates at the mean direction,
/// reduces with uncentered PCA scores rescaled to preserve geodesic length,
/// and lifts back to the (p+1)-sphere-times-size representation. Column
/// norms carry through exactly; with p = min{d+1, n-1} the transform loses
/// nothing (the weighted tangent vectors satisfy one linear relation).
std::pair<PcaTransform, Eigen::MatrixXd> pca_transform(const Eigen::MatrixXd& data, int p);

/// Standard PNC on the reduced representation.
std::pair<FastPncModel, ScoreMatrix> fast_fit(const Eigen::MatrixXd& data, int p,
                                              ResidualKind kind,
                                              const OptimizerConfig& config = {});

/// Linear inverse of the transform: mean-direction component plus the
/// principal-direction components.
Eigen::MatrixXd pca_inverse(const PcaTransform& pca, const Eigen::MatrixXd& reduced);

/// Standard back-fit in the reduced space followed by the linear inverse.
Eigen::MatrixXd fast_backfit(const FastPncModel& model, const ReconstructionRequest& req);

std::string fast_model_to_json(const FastPncModel& model);
FastPncModel fast_model_from_json(const std::string& text);

} // namespace pnc
