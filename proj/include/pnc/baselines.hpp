#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

#include "pnc/model.hpp"

namespace pnc {

/// Ordinary centered PCA, kept around as the linear comparison method.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd directions;  // columns, orthonormal, descending eigenvalues
    Eigen::VectorXd eigenvalues; // nonincreasing, clamped at zero
};

/// Centered PCA of column observations; scores are n x k projections.
std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& data, int k);

/// mean + directions * scores^T for the retained components.
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& scores);

/// PNS realized through the cone engine: normalize every observation to
/// unit size, then fit. Returned sizes are all one.
std::pair<PncModel, ScoreMatrix> pns_fit(const Eigen::MatrixXd& data, ResidualKind kind,
                                         const OptimizerConfig& config = {});

struct MethodResult {
    double mean_backfit_distance = 0.0;
    double variance_explained = 0.0;
};

/// One cell of the reconstruction comparison: all three methods fitted on
/// the same noisy 3-D cone sample and evaluated at the given component
/// count (size, then score columns for the cone methods).
struct ComparisonRow {
    double alpha = 0.0;
    double sigma = 0.0;
    int components = 0;
    MethodResult pnc;
    MethodResult pns;
    MethodResult pca;
};

/// Adds noise at `sigma` (skipped when sigma <= 0), fits PNC, PNS and PCA,
/// reconstructs with `components` and reports mean back-fit distance and
/// variance explained per method. PNS reconstructions are rescaled to the
/// observed sizes.
ComparisonRow backfit_comparison(const Eigen::MatrixXd& data, int components, double sigma,
                                 double opening, std::uint64_t seed);

} // namespace pnc
