#include "pnc/backfit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pnc/cone_geometry.hpp"

namespace pnc {

namespace {
constexpr double kPi = std::numbers::pi;
}

double chordal_residual_adjust(double xi, double size) {
    if (!(size > 0.0)) {
        throw DomainError("chordal_residual_adjust: size must be positive");
    }
    const double ratio = xi / (2.0 * size);
    if (std::abs(ratio) > 1.0) {
        std::ostringstream msg;
        msg << "chordal residual " << xi << " exceeds the 2r chord bound at size " << size;
        throw DomainError(msg.str());
    }
    return 2.0 * std::asin(ratio);
}

Eigen::MatrixXd reconstruct_from_residuals(const PncModel& model,
                                           const Eigen::MatrixXd& stage_residuals,
                                           const Eigen::VectorXd& sizes) {
    const int d = model.d();
    const Eigen::Index n = stage_residuals.rows();
    if (stage_residuals.cols() != d) {
        throw DimensionError("reconstruct_from_residuals: residual columns != d");
    }
    if (sizes.size() != n) {
        throw DimensionError("reconstruct_from_residuals: sizes/residual row mismatch");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(sizes(i) > 0.0)) {
            std::ostringstream msg;
            msg << "reconstruct_from_residuals: size of observation " << i
                << " must be positive";
            throw DomainError(msg.str());
        }
    }

    const auto increment = [&](double xi, double r) {
        return model.residual_kind == ResidualKind::Riemannian
                   ? xi / r
                   : chordal_residual_adjust(xi, r);
    };

    // Final stage: place each observation on the circle at the reference
    // angle of v_d plus its signed angular deviation.
    const double phi = model.final_reference_angle();
    Eigen::MatrixXd current(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = phi + increment(stage_residuals(i, d - 1), sizes(i));
        current(0, i) = std::cos(a) * sizes(i);
        current(1, i) = std::sin(a) * sizes(i);
    }

    for (int k = d - 1; k >= 1; --k) {
        const HyperconeStage& stage = model.stages[static_cast<std::size_t>(k - 1)];
        const Eigen::MatrixXd rot = rodrigues_rotation(stage.axis);
        const Eigen::Index m = current.rows() + 1;
        Eigen::MatrixXd lifted(m, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double beta =
                stage.opening + increment(stage_residuals(i, k - 1), sizes(i));
            lifted.col(i).head(m - 1) = std::sin(beta) * current.col(i);
            lifted(m - 1, i) = std::cos(beta) * sizes(i);
        }
        current = rot.transpose() * lifted;
    }
    return current;
}

Eigen::MatrixXd backfit(const PncModel& model, const ReconstructionRequest& req) {
    const int d = model.d();
    if (req.scores.cols() != d) {
        std::ostringstream msg;
        msg << "backfit: score matrix has " << req.scores.cols() << " columns, model has "
            << d << " stages";
        throw DimensionError(msg.str());
    }
    if (req.sizes.size() != req.scores.rows()) {
        throw DimensionError("backfit: sizes/scores row mismatch");
    }
    if (req.keep < 0 || req.keep > d) {
        throw DomainError("backfit: keep must lie in [0, d]");
    }

    // Scores sit in reverse-stage order; divide out the scale factors and
    // zero the truncated (early-stage) columns. A zero factor (some earlier
    // opening is exactly 0) scales every score of that stage to zero, so
    // the recovered residual is zero as well.
    Eigen::MatrixXd residuals(req.scores.rows(), d);
    for (int k = 1; k <= d; ++k) {
        const int col = d - k; // score column holding stage k
        const double factor = model.scale_factor(k);
        if (col < req.keep && factor > 0.0) {
            residuals.col(k - 1) = req.scores.col(col) / factor;
        } else {
            residuals.col(k - 1).setZero();
        }
    }
    return reconstruct_from_residuals(model, residuals, req.sizes);
}

Eigen::VectorXd mean_size_and_shape(const PncModel& model, const Eigen::VectorXd& sizes) {
    if (sizes.size() == 0) {
        throw DimensionError("mean_size_and_shape: empty sizes");
    }
    ReconstructionRequest req;
    req.scores = Eigen::MatrixXd::Zero(1, model.d());
    req.sizes = Eigen::VectorXd::Constant(1, sizes.mean());
    req.keep = model.d();
    return backfit(model, req).col(0);
}

Eigen::MatrixXd score_path(const PncModel& model, double size, int column,
                           const std::vector<double>& values) {
    if (column < 1 || column > model.d()) {
        throw DomainError("score_path: column outside [1, d]");
    }
    if (!(size > 0.0)) {
        throw DomainError("score_path: size must be positive");
    }
    const Eigen::Index len = static_cast<Eigen::Index>(values.size());
    ReconstructionRequest req;
    req.scores = Eigen::MatrixXd::Zero(len, model.d());
    for (Eigen::Index i = 0; i < len; ++i) {
        req.scores(i, column - 1) = values[static_cast<std::size_t>(i)];
    }
    req.sizes = Eigen::VectorXd::Constant(len, size);
    req.keep = model.d();
    return backfit(model, req);
}

} // namespace pnc
