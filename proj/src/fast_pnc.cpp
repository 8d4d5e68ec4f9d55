#include "pnc/fast_pnc.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pnc/cone_geometry.hpp"
#include "pnc/fit.hpp"

namespace pnc {

namespace {

// Deterministic eigenvector sign: the coordinate of largest absolute value
// is made positive; ties break toward the lowest index.
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

// Orthonormal completion against the columns of `frame`, drawn from the
// standard basis in index order.
Eigen::MatrixXd complete_frame(const Eigen::MatrixXd& frame, int extra) {
    const Eigen::Index m = frame.rows();
    Eigen::MatrixXd out(m, extra);
    int found = 0;
    for (Eigen::Index j = 0; j < m && found < extra; ++j) {
        Eigen::VectorXd cand = Eigen::VectorXd::Zero(m);
        cand(j) = 1.0;
        cand -= frame * (frame.transpose() * cand);
        for (int c = 0; c < found; ++c) {
            cand -= out.col(c).dot(cand) * out.col(c);
        }
        const double norm = cand.norm();
        if (norm > 1e-8) {
            out.col(found++) = cand / norm;
        }
    }
    if (found < extra) {
        throw NumericalError("pca_transform: cannot complete an orthonormal frame");
    }
    return out;
}

} // namespace

std::pair<PcaTransform, Eigen::MatrixXd> pca_transform(const Eigen::MatrixXd& data, int p) {
    const Eigen::Index m = data.rows(); // d+1
    const Eigen::Index n = data.cols();
    const int p_max = static_cast<int>(std::min<Eigen::Index>(m, n - 1));
    if (p < 1 || p > p_max) {
        std::ostringstream msg;
        msg << "pca_transform: p = " << p << " outside [1, " << p_max << "]";
        throw DomainError(msg.str());
    }

    Eigen::VectorXd sizes(n);
    Eigen::MatrixXd unit(m, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = data.col(i).norm();
        if (r < kApexTol) {
            std::ostringstream msg;
            msg << "pca_transform: column " << i << " is the apex";
            throw ApexError(msg.str());
        }
        sizes(i) = r;
        unit.col(i) = data.col(i) / r;
    }

    Eigen::VectorXd mean_dir = unit.rowwise().mean();
    const double mean_norm = mean_dir.norm();
    if (mean_norm < 1e-12) {
        throw NumericalError("pca_transform: mean direction vanishes");
    }
    mean_dir /= mean_norm;

    // Tangent vectors of the raw observations at the mean direction.
    Eigen::MatrixXd tangents(m, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        tangents.col(i) = data.col(i) - mean_dir.dot(data.col(i)) * mean_dir;
    }

    // Principal directions of the (uncentered) tangent matrix; the Gram
    // trick keeps the eigenproblem n x n in the d >> n regime.
    Eigen::MatrixXd kept(m, 0);
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors;
    if (m > n) {
        const Eigen::MatrixXd gram = tangents.transpose() * tangents;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        eigenvalues = solver.eigenvalues();
        vectors = tangents * solver.eigenvectors();
    } else {
        const Eigen::MatrixXd cov = tangents * tangents.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        eigenvalues = solver.eigenvalues();
        vectors = solver.eigenvectors();
    }

    const double lambda_max = eigenvalues.size() > 0 ? eigenvalues.maxCoeff() : 0.0;
    const double cutoff = 1e-12 * lambda_max;
    std::vector<Eigen::Index> order;
    for (Eigen::Index j = eigenvalues.size() - 1; j >= 0; --j) {
        if (lambda_max > 0.0 && eigenvalues(j) > cutoff) order.push_back(j);
    }
    const int n_kept = std::min<int>(p, static_cast<int>(order.size()));
    kept.resize(m, n_kept);
    for (int c = 0; c < n_kept; ++c) {
        Eigen::VectorXd v = vectors.col(order[static_cast<std::size_t>(c)]);
        v -= mean_dir.dot(v) * mean_dir; // enforce exact tangency
        v.normalize();
        fix_sign(v);
        kept.col(c) = v;
    }

    PcaTransform pca;
    pca.mean_direction = mean_dir;
    pca.p = p;
    pca.effective_p = n_kept;
    if (n_kept < p) {
        // Null directions are dropped from the eigen pool; the frame is
        // padded deterministically so the requested width still holds.
        Eigen::MatrixXd frame(m, n_kept + 1);
        frame.col(0) = mean_dir;
        frame.rightCols(n_kept) = kept;
        Eigen::MatrixXd pad = complete_frame(frame, p - n_kept);
        pca.directions.resize(m, p);
        pca.directions.leftCols(n_kept) = kept;
        pca.directions.rightCols(p - n_kept) = pad;
    } else {
        pca.directions = kept;
    }

    // Scores rescaled so tangent length matches geodesic length, then the
    // exponential-map lift back to the sphere at each observation's size.
    Eigen::MatrixXd reduced(p + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = sizes(i);
        const double rho = std::acos(clamp_unit(mean_dir.dot(unit.col(i))));
        const double t_norm = tangents.col(i).norm();
        Eigen::VectorXd q = Eigen::VectorXd::Zero(p);
        if (t_norm >= 1e-14 * r) {
            q = (rho * r / t_norm) * (pca.directions.transpose() * tangents.col(i));
        }
        const double u_norm = q.norm();
        reduced(0, i) = std::cos(u_norm / r) * r;
        if (u_norm < 1e-300) {
            reduced.col(i).tail(p).setZero();
        } else {
            reduced.col(i).tail(p) = std::sin(u_norm / r) * (r / u_norm) * q;
        }
    }
    return {std::move(pca), std::move(reduced)};
}

std::pair<FastPncModel, ScoreMatrix> fast_fit(const Eigen::MatrixXd& data, int p,
                                              ResidualKind kind,
                                              const OptimizerConfig& config) {
    if (p + 1 < 3) {
        throw DomainError("fast_fit: need p >= 2 so the reduced space supports PNC");
    }
    auto [pca, reduced] = pca_transform(data, p);
    auto [inner, scores] = fit(reduced, kind, config);
    FastPncModel model;
    model.pca = std::move(pca);
    model.inner = std::move(inner);
    return {std::move(model), std::move(scores)};
}

Eigen::MatrixXd pca_inverse(const PcaTransform& pca, const Eigen::MatrixXd& reduced) {
    if (reduced.rows() != pca.p + 1) {
        std::ostringstream msg;
        msg << "pca_inverse: reduced data has " << reduced.rows() << " rows, expected "
            << pca.p + 1;
        throw DimensionError(msg.str());
    }
    Eigen::MatrixXd frame(pca.mean_direction.size(), pca.p + 1);
    frame.col(0) = pca.mean_direction;
    frame.rightCols(pca.p) = pca.directions;
    return frame * reduced;
}

Eigen::MatrixXd fast_backfit(const FastPncModel& model, const ReconstructionRequest& req) {
    return pca_inverse(model.pca, backfit(model.inner, req));
}

std::string fast_model_to_json(const FastPncModel& model) {
    nlohmann::json j = nlohmann::json::parse(model_to_json(model.inner));
    nlohmann::json wrapper;
    wrapper["model"] = std::move(j);
    wrapper["mean_direction"] = std::vector<double>(
        model.pca.mean_direction.data(),
        model.pca.mean_direction.data() + model.pca.mean_direction.size());
    nlohmann::json cols = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.pca.directions.cols(); ++c) {
        cols.push_back(std::vector<double>(
            model.pca.directions.col(c).data(),
            model.pca.directions.col(c).data() + model.pca.directions.rows()));
    }
    wrapper["directions"] = std::move(cols);
    wrapper["p"] = model.pca.p;
    wrapper["effective_p"] = model.pca.effective_p;
    return wrapper.dump(2);
}

FastPncModel fast_model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fast model JSON: ") + e.what());
    }
    FastPncModel model;
    try {
        model.inner = model_from_json(j.at("model").dump());
        const auto mean = j.at("mean_direction").get<std::vector<double>>();
        model.pca.mean_direction = Eigen::Map<const Eigen::VectorXd>(
            mean.data(), static_cast<Eigen::Index>(mean.size()));
        const auto cols = j.at("directions").get<std::vector<std::vector<double>>>();
        model.pca.p = j.at("p").get<int>();
        model.pca.effective_p = j.value("effective_p", model.pca.p);
        model.pca.directions.resize(model.pca.mean_direction.size(),
                                    static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            model.pca.directions.col(static_cast<Eigen::Index>(c)) =
                Eigen::Map<const Eigen::VectorXd>(cols[c].data(),
                                                  static_cast<Eigen::Index>(cols[c].size()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fast model JSON: ") + e.what());
    }
    return model;
}

} // namespace pnc
