#include "pnc/fit.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "pnc/cone_geometry.hpp"
#include "pnc/inference.hpp"
#include "pnc/optimize.hpp"
#include "pnc/rng.hpp"

namespace pnc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOpeningMax = kPi / 2 - kOpeningGuard;

double wrap_pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a > kPi) a -= 2.0 * kPi;
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

// Triangle-wave reflection of the opening into [0, pi/2], then the
// identifiability cap just below pi/2.
double fold_opening(double alpha) {
    double t = std::fmod(alpha, 2.0 * (kPi / 2));
    if (t < 0.0) t += kPi;
    const double folded = t <= kPi / 2 ? t : kPi - t;
    return std::min(folded, kOpeningMax);
}

struct ColumnView {
    Eigen::MatrixXd unit; // unit directions, one column per observation
    Eigen::VectorXd sizes;
    Eigen::VectorXd weights; // sizes^2 / sum(sizes^2)
    double total_sq = 0.0;   // sum(sizes^2)
};

ColumnView split_columns(const Eigen::MatrixXd& data, const char* op) {
    ColumnView view;
    const Eigen::Index n = data.cols();
    view.unit.resize(data.rows(), n);
    view.sizes.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = data.col(i).norm();
        if (r < kApexTol) {
            std::ostringstream msg;
            msg << op << ": column " << i << " is the apex (size " << r << ")";
            throw ApexError(msg.str());
        }
        view.sizes(i) = r;
        view.unit.col(i) = data.col(i) / r;
    }
    view.total_sq = view.sizes.squaredNorm();
    view.weights = view.sizes.array().square() / view.total_sq;
    return view;
}

Eigen::VectorXd signed_angles(const Eigen::MatrixXd& unit, const Eigen::VectorXd& axis) {
    Eigen::VectorXd out(unit.cols());
    for (Eigen::Index i = 0; i < unit.cols(); ++i) {
        const double det = axis(0) * unit(1, i) - axis(1) * unit(0, i);
        out(i) = std::atan2(det, unit.col(i).dot(axis));
    }
    return out;
}

double residual_scale(double dev, ResidualKind kind) {
    return kind == ResidualKind::Riemannian ? dev : 2.0 * std::sin(dev / 2.0);
}

// Normalized objective for an intermediate stage in the rotated frame:
// sum_i w_i g(acos(W_i . h(theta)) - alpha)^2 with w_i = r_i^2 / sum r^2.
struct StageProblem {
    const Eigen::MatrixXd& rotated_unit; // W = R0 * U
    const Eigen::VectorXd& weights;
    ResidualKind kind;

    double operator()(const Eigen::VectorXd& params) const {
        const Eigen::Index m = rotated_unit.rows();
        const Eigen::VectorXd axis = hyperspherical_point(params.head(m - 1));
        const double alpha = fold_opening(params(m - 1));
        double q = 0.0;
        for (Eigen::Index i = 0; i < rotated_unit.cols(); ++i) {
            const double c = rotated_unit.col(i).dot(axis);
            const double dev = stable_angle(rotated_unit.col(i), axis, c) - alpha;
            const double g = residual_scale(dev, kind);
            q += weights(i) * g * g;
        }
        return q;
    }
};

// Damped Gauss-Newton refinement of (theta, alpha). Large steps must lower
// the objective; once steps shrink into the quadratic basin the objective
// comparison saturates at roundoff, so acceptance switches to the gradient
// norm. Repeated runs therefore land on the same basin minimizer to
// machine order regardless of the simplex path that seeded them.
struct StageGradient {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess; // Gauss-Newton approximation J^T J
    double fx = 0.0;
};

StageGradient stage_gradient(const StageProblem& problem, const Eigen::VectorXd& params) {
    const Eigen::Index m = problem.rotated_unit.rows();
    const Eigen::Index n = problem.rotated_unit.cols();
    const Eigen::VectorXd angles = params.head(m - 1);
    const Eigen::VectorXd axis = hyperspherical_point(angles);
    const Eigen::MatrixXd dh = hyperspherical_jacobian(angles);
    const double alpha = fold_opening(params(m - 1));
    // Chain sign of the triangle-wave fold at the current raw opening.
    double t = std::fmod(params(m - 1), kPi);
    if (t < 0.0) t += kPi;
    const double fold_sign = t <= kPi / 2 ? 1.0 : -1.0;

    Eigen::MatrixXd jac(n, m);
    Eigen::VectorXd rho(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double c = clamp_unit(problem.rotated_unit.col(i).dot(axis));
        const double theta = stable_angle(problem.rotated_unit.col(i), axis, c);
        const double dev = theta - alpha;
        const double sw = std::sqrt(problem.weights(i));
        const double gp =
            problem.kind == ResidualKind::Riemannian ? 1.0 : std::cos(dev / 2.0);
        rho(i) = sw * residual_scale(dev, problem.kind);
        const double sin_theta = std::max(std::sqrt(1.0 - c * c), 1e-9);
        const Eigen::VectorXd dtheta =
            -(problem.rotated_unit.col(i).transpose() * dh).transpose() / sin_theta;
        jac.row(i).head(m - 1) = (sw * gp) * dtheta.transpose();
        jac(i, m - 1) = -sw * gp * fold_sign;
    }
    StageGradient out;
    out.grad = jac.transpose() * rho;
    out.hess = jac.transpose() * jac;
    out.fx = rho.squaredNorm();
    return out;
}

MinimizeResult gauss_newton_polish(const StageProblem& problem, Eigen::VectorXd params,
                                   double f0) {
    const Eigen::Index dim = params.size();
    double lambda = 1e-10;
    double f_cur = f0;
    int iters = 0;
    bool converged = false;

    StageGradient cur = stage_gradient(problem, params);
    for (; iters < 60; ++iters) {
        bool accepted = false;
        Eigen::VectorXd delta;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd damped = cur.hess;
            for (Eigen::Index j = 0; j < dim; ++j) {
                damped(j, j) += lambda * std::max(cur.hess(j, j), 1e-12);
            }
            delta = damped.ldlt().solve(-cur.grad);
            const Eigen::VectorXd trial = params + delta;
            const double f_trial = problem(trial);
            const bool small_step = delta.lpNorm<Eigen::Infinity>() < 1e-6;
            if (f_trial < f_cur) {
                params = trial;
                f_cur = f_trial;
                cur = stage_gradient(problem, params);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                break;
            }
            if (small_step) {
                // Objective comparison has saturated; fall back to the
                // stationarity measure.
                const StageGradient trial_grad = stage_gradient(problem, trial);
                if (trial_grad.grad.norm() < cur.grad.norm()) {
                    params = trial;
                    f_cur = std::min(f_cur, f_trial);
                    cur = trial_grad;
                    accepted = true;
                    break;
                }
            }
            lambda *= 8.0;
        }
        if (!accepted) {
            converged = true;
            break;
        }
        if (delta.lpNorm<Eigen::Infinity>() < 1e-13) {
            converged = true;
            break;
        }
    }
    return MinimizeResult{std::move(params), f_cur, iters, converged};
}

StageFit fit_intermediate_stage(const ColumnView& view, ResidualKind kind,
                                const OptimizerConfig& config) {
    const Eigen::Index m = view.unit.rows();

    Eigen::VectorXd mean_dir = view.unit.rowwise().mean();
    if (mean_dir.norm() < 1e-12) {
        mean_dir = view.unit.col(0); // directions cancel; any start works
    }
    mean_dir.normalize();

    const Eigen::VectorXd init_angles = angles_to_axis(view.unit, mean_dir);
    if (init_angles.maxCoeff() < 1e-12) {
        // All observations share one direction: a zero-opening cone fits exactly.
        const double q = (init_angles.array().square() * view.weights.array()).sum();
        StageFit out;
        out.stage = HyperconeStage(mean_dir, 0.0);
        out.diagnostics = StageDiagnostics{q * view.total_sq, 0, true};
        return out;
    }

    double alpha0 = init_angles.mean();
    if (alpha0 > kPi / 2) {
        mean_dir = -mean_dir;
        alpha0 = kPi - alpha0;
    }
    alpha0 = std::min(std::max(alpha0, 0.0), kOpeningMax);

    // Optimize in the frame where the initial axis is e_m; the chart is
    // centered there (all angles pi/2), far from its poles.
    const Eigen::MatrixXd rot = rodrigues_rotation(mean_dir);
    const Eigen::MatrixXd rotated = rot * view.unit;
    const StageProblem problem{rotated, view.weights, kind};

    Eigen::VectorXd start(m);
    start.head(m - 1).setConstant(kPi / 2);
    start(m - 1) = alpha0;

    MinimizeResult best;
    best.fx = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    bool any_converged = false;
    for (int attempt = 0; attempt < config.restarts; ++attempt) {
        Eigen::VectorXd x0 = start;
        if (attempt > 0) {
            Rng jitter(derive_seed(config.seed, 0x5eedULL + static_cast<std::uint64_t>(attempt)));
            for (Eigen::Index j = 0; j < m; ++j) {
                x0(j) += jitter.uniform(-0.2, 0.2);
            }
        }
        MinimizeResult nm = nelder_mead(problem, x0, 0.1, config.max_iters, config.tol);
        MinimizeResult polished = gauss_newton_polish(problem, nm.x, nm.fx);
        total_iters += nm.iterations + polished.iterations;
        const bool conv = nm.converged || polished.converged;
        if (polished.fx < best.fx) {
            best = std::move(polished);
            any_converged = conv;
        }
    }

    Eigen::VectorXd axis = rot.transpose() * hyperspherical_point(best.x.head(m - 1));
    axis.normalize();
    StageFit out;
    out.stage = HyperconeStage(std::move(axis), fold_opening(best.x(m - 1)));
    out.diagnostics =
        StageDiagnostics{best.fx * view.total_sq, total_iters, any_converged};
    return out;
}

StageFit fit_final_stage(const ColumnView& view, ResidualKind kind,
                         const OptimizerConfig& config) {
    (void)config;
    const Eigen::Index n = view.unit.cols();
    Eigen::VectorXd obs_angles(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        obs_angles(i) = std::atan2(view.unit(1, i), view.unit(0, i));
    }

    const Eigen::VectorXd& w = view.weights;
    const auto objective = [&](double phi) {
        double q = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (kind == ResidualKind::Riemannian) {
                const double dev = wrap_pi(obs_angles(i) - phi);
                q += w(i) * dev * dev;
            } else {
                q += w(i) * 2.0 * (1.0 - std::cos(obs_angles(i) - phi));
            }
        }
        return q;
    };

    double phi;
    int evals = 0;
    const double spread =
        (obs_angles.array() - obs_angles(0)).unaryExpr([](double a) {
            return std::abs(wrap_pi(a));
        }).maxCoeff();
    if (spread < 1e-12) {
        phi = obs_angles(0); // identical directions
    } else {
        const int grid = 360;
        double best_phi = 0.0;
        double best_q = std::numeric_limits<double>::infinity();
        for (int g = 0; g < grid; ++g) {
            const double cand = 2.0 * kPi * g / grid;
            const double q = objective(cand);
            ++evals;
            if (q < best_q) {
                best_q = q;
                best_phi = cand;
            }
        }
        const double half = 2.0 * kPi / grid;
        phi = golden_section(objective, best_phi - half, best_phi + half, 1e-12);
        evals += 70;

        if (kind == ResidualKind::Riemannian) {
            // Fixed-point refinement: at the optimum the weighted wrapped
            // deviations average to zero. The step is the weighted circular
            // mean update, a contraction near the minimum, so it is taken
            // while the stationarity residual keeps shrinking (the objective
            // comparison saturates at roundoff well before 1e-14).
            const auto mean_deviation = [&](double at) {
                double mean_dev = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    mean_dev += w(i) * wrap_pi(obs_angles(i) - at);
                }
                return mean_dev;
            };
            double dev = mean_deviation(phi);
            for (int it = 0; it < 50 && std::abs(dev) >= 1e-15; ++it) {
                const double cand = phi + dev;
                const double cand_dev = mean_deviation(cand);
                ++evals;
                if (std::abs(cand_dev) >= std::abs(dev)) break;
                phi = cand;
                dev = cand_dev;
            }
        } else {
            double sx = 0.0;
            double sy = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                sx += w(i) * std::cos(obs_angles(i));
                sy += w(i) * std::sin(obs_angles(i));
            }
            const double closed = std::atan2(sy, sx);
            for (const double cand : {closed, closed + kPi}) {
                if (objective(cand) < objective(phi)) phi = cand;
            }
            evals += 4;
        }
    }

    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    Eigen::VectorXd axis(2);
    axis << std::cos(phi), std::sin(phi);
    StageFit out;
    out.stage = HyperconeStage(std::move(axis), 0.0);
    out.diagnostics = StageDiagnostics{objective(phi) * view.total_sq, evals, true};
    return out;
}

} // namespace

double stage_objective(const Eigen::MatrixXd& data, const Eigen::VectorXd& axis,
                       double opening, ResidualKind kind) {
    if (data.rows() != axis.size()) {
        throw DimensionError("stage_objective: axis/data dimension mismatch");
    }
    if (std::abs(axis.norm() - 1.0) > 1e-8) {
        throw DomainError("stage_objective: axis must have unit norm");
    }
    if (opening < 0.0 || opening > kPi / 2) {
        throw DomainError("stage_objective: opening outside [0, pi/2]");
    }
    const ColumnView view = split_columns(data, "stage_objective");
    if (data.rows() == 2) {
        if (opening != 0.0) {
            throw DomainError("stage_objective: the final 2-D stage has opening 0");
        }
        const Eigen::VectorXd theta = signed_angles(view.unit, axis);
        double q = 0.0;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double xi = residual_scale(theta(i), kind) * view.sizes(i);
            q += xi * xi;
        }
        return q;
    }
    const Eigen::VectorXd theta = angles_to_axis(view.unit, axis);
    double q = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double xi = residual_scale(theta(i) - opening, kind) * view.sizes(i);
        q += xi * xi;
    }
    return q;
}

StageFit fit_stage(const Eigen::MatrixXd& data, ResidualKind kind,
                   const OptimizerConfig& config) {
    config.validate();
    if (data.cols() < 2) {
        throw DimensionError("fit_stage: need at least two observations");
    }
    if (data.rows() < 2) {
        throw DimensionError("fit_stage: need at least two rows");
    }
    const ColumnView view = split_columns(data, "fit_stage");
    return data.rows() == 2 ? fit_final_stage(view, kind, config)
                            : fit_intermediate_stage(view, kind, config);
}

std::pair<PncModel, ScoreMatrix> fit(const Eigen::MatrixXd& data, ResidualKind kind,
                                     const OptimizerConfig& config) {
    config.validate();
    if (data.rows() < 3) {
        throw DimensionError("fit: ambient dimension must be >= 3");
    }
    if (data.cols() < 2) {
        throw DimensionError("fit: need at least two observations");
    }
    const Eigen::VectorXd sizes0 = data.colwise().norm();

    PncModel model;
    model.ambient_dim = static_cast<int>(data.rows());
    model.residual_kind = kind;

    Eigen::MatrixXd current = data;
    const int d = model.d();
    for (int k = 1; k <= d; ++k) {
        StageFit sf = fit_stage(current, kind, config);
        model.stages.push_back(sf.stage);
        model.fit_diagnostics.push_back(sf.diagnostics);
        if (k < d) {
            current = map_down_columns(current, sf.stage.axis);
            for (Eigen::Index i = 0; i < current.cols(); ++i) {
                const double drift = std::abs(current.col(i).norm() - sizes0(i));
                if (drift > 1e-10 * std::max(1.0, sizes0(i))) {
                    throw NumericalError("fit: observation size drifted across stages");
                }
            }
        }
    }
    model.finalize();
    return {model, transform(model, data)};
}

ScoreMatrix transform(const PncModel& model, const Eigen::MatrixXd& data) {
    if (data.rows() != model.ambient_dim) {
        std::ostringstream msg;
        msg << "transform: data has " << data.rows() << " rows, model expects "
            << model.ambient_dim;
        throw DimensionError(msg.str());
    }
    const Eigen::Index n = data.cols();
    if (n < 1) throw DimensionError("transform: empty data");
    const int d = model.d();

    ScoreMatrix out;
    out.scores.resize(n, d);
    out.scale_factors.resize(d);
    out.sizes = data.colwise().norm();

    Eigen::MatrixXd current = data;
    double factor = 1.0;
    for (int k = 1; k <= d; ++k) {
        const HyperconeStage& stage = model.stages[static_cast<std::size_t>(k - 1)];
        const ColumnView view = split_columns(current, "transform");
        out.scale_factors(k - 1) = factor;
        const Eigen::Index col = d - k;
        if (k < d) {
            const Eigen::VectorXd theta = angles_to_axis(view.unit, stage.axis);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double xi =
                    residual_scale(theta(i) - stage.opening, model.residual_kind) *
                    view.sizes(i);
                out.scores(i, col) = factor * xi;
            }
            current = map_down_columns(current, stage.axis);
        } else {
            const Eigen::VectorXd theta = signed_angles(view.unit, stage.axis);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double xi =
                    residual_scale(theta(i), model.residual_kind) * view.sizes(i);
                out.scores(i, col) = factor * xi;
            }
        }
        factor *= std::sin(stage.opening);
    }
    return out;
}

Eigen::MatrixXd final_stage_representation(const PncModel& model,
                                           const Eigen::MatrixXd& data) {
    if (data.rows() != model.ambient_dim) {
        throw DimensionError("final_stage_representation: dimension mismatch");
    }
    Eigen::MatrixXd current = data;
    for (int k = 1; k < model.d(); ++k) {
        current = map_down_columns(current, model.stages[static_cast<std::size_t>(k - 1)].axis);
    }
    return current;
}

PolarScores polar_scores(const PncModel& model, const Eigen::MatrixXd& data_at_final_stage) {
    if (data_at_final_stage.rows() != 2) {
        throw DimensionError("polar_scores: expected the 2-row final-stage matrix");
    }
    const ColumnView view = split_columns(data_at_final_stage, "polar_scores");
    const Eigen::VectorXd& axis = model.stages.back().axis;
    const Eigen::Index n = data_at_final_stage.cols();
    PolarScores out;
    out.sx.resize(n);
    out.sy.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = std::atan2(axis(0) * view.unit(1, i) - axis(1) * view.unit(0, i),
                                 view.unit.col(i).dot(axis));
        if (beta < 0.0) beta += 2.0 * kPi;
        out.sx(i) = view.sizes(i) * std::cos(beta);
        out.sy(i) = view.sizes(i) * std::sin(beta);
    }
    return out;
}

Eigen::VectorXd variance_explained(const ScoreMatrix& scores) {
    const double total = scores.scores.squaredNorm();
    if (!(total > 0.0)) {
        throw DomainError("variance_explained: all scores are zero");
    }
    Eigen::VectorXd shares(scores.d());
    for (Eigen::Index j = 0; j < scores.d(); ++j) {
        shares(j) = scores.scores.col(j).squaredNorm() / total;
    }
    return shares;
}

} // namespace pnc
