#include "pnc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "pnc/cone_geometry.hpp"
#include "pnc/fit.hpp"
#include "pnc/rng.hpp"

namespace pnc {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a > kPi) a -= 2.0 * kPi;
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

int thread_count() {
    if (const char* env = std::getenv("PNC_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Linear-interpolation quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

Eigen::VectorXd hyperspherical_point(const Eigen::VectorXd& angles) {
    const Eigen::Index m = angles.size() + 1;
    Eigen::VectorXd v(m);
    double sines = 1.0;
    for (Eigen::Index k = 0; k + 1 < m; ++k) {
        v(k) = sines * std::cos(angles(k));
        sines *= std::sin(angles(k));
    }
    v(m - 1) = sines;
    return v;
}

Eigen::VectorXd from_hyperspherical(const Eigen::VectorXd& angles) {
    const Eigen::Index m = angles.size() + 1;
    if (m < 2) throw DimensionError("from_hyperspherical: need at least one angle");
    for (Eigen::Index j = 0; j + 1 < angles.size(); ++j) {
        if (angles(j) < 0.0 || angles(j) > kPi) {
            std::ostringstream msg;
            msg << "from_hyperspherical: angle " << j + 1 << " = " << angles(j)
                << " outside [0, pi]";
            throw DomainError(msg.str());
        }
    }
    const double last = angles(angles.size() - 1);
    if (last < 0.0 || last >= 2.0 * kPi) {
        std::ostringstream msg;
        msg << "from_hyperspherical: final angle " << last << " outside [0, 2pi)";
        throw DomainError(msg.str());
    }
    return hyperspherical_point(angles);
}

Eigen::VectorXd to_hyperspherical(const Eigen::VectorXd& v) {
    const Eigen::Index m = v.size();
    if (m < 2) throw DimensionError("to_hyperspherical: need dimension >= 2");
    const double norm = v.norm();
    if (norm < 1e-12) throw DomainError("to_hyperspherical: zero vector");
    const Eigen::VectorXd u = v / norm;

    Eigen::VectorXd angles(m - 1);
    for (Eigen::Index j = 0; j + 2 < m; ++j) {
        angles(j) = std::atan2(u.tail(m - 1 - j).norm(), u(j));
    }
    double last = std::atan2(u(m - 1), u(m - 2));
    if (last < 0.0) last += 2.0 * kPi;
    angles(m - 2) = last;
    return angles;
}

Eigen::MatrixXd hyperspherical_jacobian(const Eigen::VectorXd& angles) {
    // v_k = (prod_{i<k} sin a_i) cos a_k for k < m-1, v_{m-1} = prod sin a_i.
    const Eigen::Index m = angles.size() + 1;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m - 1);
    for (Eigen::Index j = 0; j < m - 1; ++j) {
        for (Eigen::Index k = j; k < m; ++k) {
            double term = 1.0;
            const Eigen::Index sines = std::min(k, m - 1);
            for (Eigen::Index i = 0; i < sines; ++i) {
                term *= (i == j) ? std::cos(angles(i)) : std::sin(angles(i));
            }
            if (k < m - 1) {
                term *= (k == j) ? -std::sin(angles(k)) : std::cos(angles(k));
            }
            jac(k, j) = term;
        }
    }
    return jac;
}

std::vector<std::string> parameter_names(int ambient_dim) {
    const int d = ambient_dim - 1;
    std::vector<std::string> names;
    for (int k = 1; k <= d; ++k) {
        const int n_angles = ambient_dim - k; // axis length minus one
        for (int j = 1; j <= n_angles; ++j) {
            std::ostringstream name;
            name << "theta_" << k << "_" << j;
            names.push_back(name.str());
        }
    }
    for (int k = 1; k <= d - 1; ++k) {
        std::ostringstream name;
        name << "alpha_" << k;
        names.push_back(name.str());
    }
    return names;
}

Eigen::VectorXd parameter_ranges(int ambient_dim) {
    const int d = ambient_dim - 1;
    std::vector<double> ranges;
    for (int k = 1; k <= d; ++k) {
        const int n_angles = ambient_dim - k;
        for (int j = 1; j <= n_angles; ++j) {
            ranges.push_back(j == n_angles ? 2.0 * kPi : kPi);
        }
    }
    for (int k = 1; k <= d - 1; ++k) ranges.push_back(kPi / 2);
    return Eigen::Map<const Eigen::VectorXd>(ranges.data(),
                                             static_cast<Eigen::Index>(ranges.size()));
}

Eigen::VectorXd flatten_parameters(const PncModel& model, const PncModel* reference) {
    const int d = model.d();
    std::vector<double> out;
    for (int k = 1; k <= d; ++k) {
        Eigen::VectorXd axis = model.stages[static_cast<std::size_t>(k - 1)].axis;
        if (reference != nullptr) {
            const Eigen::VectorXd& ref =
                reference->stages[static_cast<std::size_t>(k - 1)].axis;
            // Branch alignment: keep each replicate axis within pi/2 of the
            // point estimate so the chart seam cannot split one mode in two.
            if (axis.dot(ref) < 0.0) axis = -axis;
        }
        Eigen::VectorXd angles = to_hyperspherical(axis);
        if (k == d && reference != nullptr) {
            const double ref_angle =
                to_hyperspherical(reference->stages[static_cast<std::size_t>(k - 1)].axis)(0);
            angles(0) = ref_angle + wrap_pi(angles(0) - ref_angle);
        }
        for (Eigen::Index j = 0; j < angles.size(); ++j) out.push_back(angles(j));
    }
    for (int k = 1; k <= d - 1; ++k) {
        out.push_back(model.stages[static_cast<std::size_t>(k - 1)].opening);
    }
    return Eigen::Map<const Eigen::VectorXd>(out.data(),
                                             static_cast<Eigen::Index>(out.size()));
}

double BootstrapSummary::mean_normalized_width() const {
    if (parameters.empty()) return 0.0;
    double total = 0.0;
    for (const BootstrapParameter& p : parameters) total += p.normalized_width;
    return total / static_cast<double>(parameters.size());
}

BootstrapSummary bootstrap(const Eigen::MatrixXd& data, int B, double level,
                           ResidualKind kind, const OptimizerConfig& config,
                           std::uint64_t seed) {
    if (B < 2) throw DomainError("bootstrap: B must be >= 2");
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("bootstrap: level must lie in (0, 1)");
    }
    const Eigen::Index n = data.cols();
    if (n < data.rows() + 1) {
        throw DimensionError("bootstrap: need n >= d+2 observations");
    }

    const auto [point_model, point_scores] = fit(data, kind, config);
    (void)point_scores;
    const Eigen::VectorXd estimate = flatten_parameters(point_model, nullptr);
    const Eigen::VectorXd ranges = parameter_ranges(point_model.ambient_dim);
    const std::vector<std::string> names = parameter_names(point_model.ambient_dim);

    std::vector<std::optional<Eigen::VectorXd>> replicates(static_cast<std::size_t>(B));
    const auto run_block = [&](int lo, int hi) {
        for (int b = lo; b < hi; ++b) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
            Eigen::MatrixXd resample(data.rows(), n);
            for (Eigen::Index i = 0; i < n; ++i) {
                resample.col(i) = data.col(static_cast<Eigen::Index>(rng.index(
                    static_cast<std::size_t>(n))));
            }
            try {
                const auto [m, s] = fit(resample, kind, config);
                (void)s;
                replicates[static_cast<std::size_t>(b)] =
                    flatten_parameters(m, &point_model);
            } catch (const Error&) {
                // degenerate resample; counted below
            }
        }
    };

    const int threads = std::min(thread_count(), B);
    if (threads <= 1) {
        run_block(0, B);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (B + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(B, lo + chunk);
            if (lo < hi) pool.emplace_back(run_block, lo, hi);
        }
        for (std::thread& th : pool) th.join();
    }

    int skipped = 0;
    for (const auto& rep : replicates) {
        if (!rep.has_value()) ++skipped;
    }
    if (skipped * 10 > B) {
        std::ostringstream msg;
        msg << "bootstrap: " << skipped << " of " << B << " replicates failed to refit";
        throw NumericalError(msg.str());
    }

    BootstrapSummary summary;
    summary.replicates = B;
    summary.skipped = skipped;
    summary.level = level;
    summary.seed = seed;
    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    for (Eigen::Index j = 0; j < estimate.size(); ++j) {
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(B));
        for (const auto& rep : replicates) {
            if (rep.has_value()) values.push_back((*rep)(j));
        }
        std::sort(values.begin(), values.end());
        BootstrapParameter param;
        param.name = names[static_cast<std::size_t>(j)];
        param.estimate = estimate(j);
        param.lower = quantile_sorted(values, q_lo);
        param.upper = quantile_sorted(values, q_hi);
        param.normalized_width = (param.upper - param.lower) / ranges(j);
        param.contains_estimate =
            param.lower <= param.estimate && param.estimate <= param.upper;
        summary.parameters.push_back(std::move(param));
    }
    return summary;
}

} // namespace pnc
