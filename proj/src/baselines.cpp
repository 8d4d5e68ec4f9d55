#include "pnc/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "pnc/backfit.hpp"
#include "pnc/cone_geometry.hpp"
#include "pnc/fit.hpp"
#include "pnc/simulate.hpp"

namespace pnc {

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (std::abs(v(j)) > best + 1e-15) {
            best = std::abs(v(j));
            arg = j;
        }
    }
    if (v(arg) < 0.0) v = -v;
}

Eigen::MatrixXd normalize_columns(const Eigen::MatrixXd& data) {
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
        const double r = data.col(i).norm();
        if (r < kApexTol) {
            std::ostringstream msg;
            msg << "pns_fit: column " << i << " is the apex";
            throw ApexError(msg.str());
        }
        out.col(i) = data.col(i) / r;
    }
    return out;
}

} // namespace

std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& data, int k) {
    const Eigen::Index m = data.rows();
    const Eigen::Index n = data.cols();
    if (k < 1 || k > std::min<Eigen::Index>(m, n - 1)) {
        std::ostringstream msg;
        msg << "pca_fit_transform: k = " << k << " outside [1, " << std::min<Eigen::Index>(m, n - 1)
            << "]";
        throw DomainError(msg.str());
    }

    PcaModel model;
    model.mean = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - model.mean;
    const Eigen::MatrixXd cov =
        centered * centered.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);

    model.directions.resize(m, k);
    model.eigenvalues.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Index src = m - 1 - j; // descending order
        model.eigenvalues(j) = std::max(solver.eigenvalues()(src), 0.0);
        if (j < k) {
            Eigen::VectorXd v = solver.eigenvectors().col(src);
            fix_sign(v);
            model.directions.col(j) = v;
        }
    }
    Eigen::MatrixXd scores = centered.transpose() * model.directions;
    return {std::move(model), std::move(scores)};
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& scores) {
    if (scores.cols() != model.directions.cols()) {
        throw DimensionError("pca_reconstruct: score/direction mismatch");
    }
    return (model.directions * scores.transpose()).colwise() + model.mean;
}

std::pair<PncModel, ScoreMatrix> pns_fit(const Eigen::MatrixXd& data, ResidualKind kind,
                                         const OptimizerConfig& config) {
    return fit(normalize_columns(data), kind, config);
}

ComparisonRow backfit_comparison(const Eigen::MatrixXd& data, int components, double sigma,
                                 double opening, std::uint64_t seed) {
    if (data.rows() != 3) {
        throw DimensionError("backfit_comparison: the comparison protocol is 3-D");
    }
    if (components < 1 || components > 3) {
        throw DomainError("backfit_comparison: components must lie in {1, 2, 3}");
    }
    const Eigen::MatrixXd noisy =
        sigma > 0.0 ? add_ambient_noise(data, sigma, seed) : data;
    const Eigen::Index n = noisy.cols();
    const Eigen::VectorXd sizes = noisy.colwise().norm();

    ComparisonRow row;
    row.alpha = opening;
    row.sigma = sigma;
    row.components = components;

    const auto mean_distance = [&](const Eigen::MatrixXd& recon) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            total += (noisy.col(i) - recon.col(i)).norm();
        }
        return total / static_cast<double>(n);
    };
    // Cone methods: component 1 is size, further components add score
    // columns; explained share sums the retained columns.
    const auto cone_share = [&](const ScoreMatrix& sm, int keep) {
        const double total = sm.scores.squaredNorm();
        if (!(total > 0.0)) return 0.0;
        double kept = 0.0;
        for (int j = 0; j < keep; ++j) kept += sm.scores.col(j).squaredNorm();
        return kept / total;
    };

    const int keep = components - 1;

    {
        const auto [model, scores] = fit(noisy, ResidualKind::Riemannian, {});
        const Eigen::MatrixXd recon =
            backfit(model, ReconstructionRequest{scores.scores, sizes, keep});
        row.pnc.mean_backfit_distance = mean_distance(recon);
        row.pnc.variance_explained = cone_share(scores, keep);
    }
    {
        const auto [model, scores] = pns_fit(noisy, ResidualKind::Riemannian, {});
        Eigen::MatrixXd recon = backfit(
            model, ReconstructionRequest{scores.scores,
                                         Eigen::VectorXd::Ones(n), keep});
        for (Eigen::Index i = 0; i < n; ++i) recon.col(i) *= sizes(i);
        row.pns.mean_backfit_distance = mean_distance(recon);
        row.pns.variance_explained = cone_share(scores, keep);
    }
    {
        const auto [model, scores] = pca_fit_transform(noisy, components);
        row.pca.mean_backfit_distance = mean_distance(pca_reconstruct(model, scores));
        const double total = model.eigenvalues.sum();
        row.pca.variance_explained =
            total > 0.0 ? model.eigenvalues.head(components).sum() / total : 0.0;
    }
    return row;
}

} // namespace pnc
