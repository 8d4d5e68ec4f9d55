#include "pnc/simulate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pnc/backfit.hpp"
#include "pnc/cone_geometry.hpp"
#include "pnc/rng.hpp"

namespace pnc {

namespace {

constexpr double kPi = std::numbers::pi;

double truncated_normal(Rng& rng, double sd, double bound) {
    // Rejection sampling; the designed bounds are several sd wide.
    for (int tries = 0; tries < 100000; ++tries) {
        const double draw = rng.normal(0.0, sd);
        if (std::abs(draw) <= bound) return draw;
    }
    throw NumericalError("truncated normal: acceptance rate below 1e-4");
}

} // namespace

void RegionSpec::validate() const {
    if (!(r_lo > 0.0) || r_lo > r_hi) {
        throw DomainError("RegionSpec: need 0 < r_lo <= r_hi");
    }
    if (theta_lo < 0.0 || theta_lo >= theta_hi || theta_hi > 2.0 * kPi) {
        throw DomainError("RegionSpec: need 0 <= theta_lo < theta_hi <= 2pi");
    }
    if (!(opening > 0.0) || opening > kPi / 2) {
        throw DomainError("RegionSpec: opening outside (0, pi/2]");
    }
    if (count < 1) throw DomainError("RegionSpec: count must be positive");
}

std::vector<RegionSpec> three_region_design(double opening, int per_region) {
    return {
        RegionSpec{opening, 1.0, 2.0, 0.0, kPi, per_region},
        RegionSpec{opening, 4.0, 5.0, 0.0, kPi, per_region},
        RegionSpec{opening, 4.0, 5.0, kPi, 2.0 * kPi, per_region},
    };
}

LabeledData sample_cone_regions(const std::vector<RegionSpec>& regions, std::uint64_t seed) {
    int total = 0;
    for (const RegionSpec& region : regions) {
        region.validate();
        total += region.count;
    }
    LabeledData out;
    out.data.resize(3, total);
    out.labels.reserve(static_cast<std::size_t>(total));

    Rng rng(seed);
    Eigen::Index col = 0;
    int label = 1;
    for (const RegionSpec& region : regions) {
        const double s = std::sin(region.opening);
        const double c = std::cos(region.opening);
        for (int i = 0; i < region.count; ++i) {
            const double r = rng.uniform(region.r_lo, region.r_hi);
            // Half-open angular draw so theta_hi = 2pi never double-counts 0.
            const double theta = rng.uniform(region.theta_lo, region.theta_hi);
            out.data(0, col) = r * s * std::cos(theta);
            out.data(1, col) = r * s * std::sin(theta);
            out.data(2, col) = r * c;
            out.labels.push_back(label);
            ++col;
        }
        ++label;
    }
    return out;
}

Eigen::MatrixXd sample_spiral(double opening, std::pair<double, double> r_range,
                              std::pair<double, double> theta_range, int n) {
    if (n < 2) throw DomainError("sample_spiral: need n >= 2");
    if (!(opening > 0.0) || opening > kPi / 2) {
        throw DomainError("sample_spiral: opening outside (0, pi/2]");
    }
    if (!(r_range.first > 0.0) || r_range.first > r_range.second) {
        throw DomainError("sample_spiral: bad radial range");
    }
    if (theta_range.first >= theta_range.second) {
        throw DomainError("sample_spiral: bad angular range");
    }
    const double s = std::sin(opening);
    const double c = std::cos(opening);
    Eigen::MatrixXd out(3, n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        const double r = r_range.first + t * (r_range.second - r_range.first);
        const double theta = theta_range.first + t * (theta_range.second - theta_range.first);
        out(0, i) = r * s * std::cos(theta);
        out(1, i) = r * s * std::sin(theta);
        out(2, i) = r * c;
    }
    return out;
}

PncModel GeneratorSpec::to_model(ResidualKind kind) const {
    PncModel model;
    model.ambient_dim = static_cast<int>(axes.front().size());
    model.residual_kind = kind;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const double opening = k < openings.size() ? openings[k] : 0.0;
        model.stages.emplace_back(axes[k], opening);
    }
    model.finalize();
    return model;
}

void GeneratorSpec::validate() const {
    if (axes.empty()) throw DomainError("GeneratorSpec: no axes");
    const int d = static_cast<int>(axes.size());
    if (static_cast<int>(openings.size()) != d - 1) {
        throw DimensionError("GeneratorSpec: need d-1 openings");
    }
    if (static_cast<int>(residual_laws.size()) != d) {
        throw DimensionError("GeneratorSpec: need one residual law per stage");
    }
    for (const ResidualLaw& law : residual_laws) {
        if (!(law.sd > 0.0)) throw DomainError("GeneratorSpec: sd must be positive");
        if (!(law.bound > 0.0)) throw DomainError("GeneratorSpec: bound must be positive");
    }
    if (!(size_lo > 0.0) || size_lo > size_hi) {
        throw DomainError("GeneratorSpec: bad size range");
    }
    if (count < 1) throw DomainError("GeneratorSpec: count must be positive");
}

GeneratorSpec table_design(int n, std::uint64_t seed) {
    GeneratorSpec spec;
    Eigen::VectorXd v1(4);
    v1 << 0.5, 0.5, 0.5, 0.5;
    Eigen::VectorXd v2 = Eigen::VectorXd::Constant(3, 1.0 / std::sqrt(3.0));
    Eigen::VectorXd v3 = Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(2.0));
    spec.axes = {v1, v2, v3};
    spec.openings = {kPi / 6, kPi / 4};
    spec.size_lo = 10.0;
    spec.size_hi = 20.0;
    // Stage residual laws: xi_3 from stage 1, xi_2 from stage 2, xi_1 from
    // stage 3; the first two truncate at the opening of the other stage
    // times the realized size, the last at pi times size.
    spec.residual_laws = {
        ResidualLaw{0.3, false, kPi / 6, true},
        ResidualLaw{1.0, false, kPi / 4, true},
        ResidualLaw{kPi / 3, true, kPi, true},
    };
    spec.count = n;
    spec.seed = seed;
    return spec;
}

Eigen::MatrixXd sample_from_model(const GeneratorSpec& spec) {
    spec.validate();
    const PncModel model = spec.to_model();
    const int d = model.d();

    Rng rng(spec.seed);
    Eigen::VectorXd sizes(spec.count);
    Eigen::MatrixXd residuals(spec.count, d);
    for (int i = 0; i < spec.count; ++i) {
        const double r = rng.uniform(spec.size_lo, spec.size_hi);
        sizes(i) = r;
        for (int k = 0; k < d; ++k) {
            const ResidualLaw& law = spec.residual_laws[static_cast<std::size_t>(k)];
            const double sd = law.sd_scales_with_size ? law.sd * r : law.sd;
            const double bound = law.bound_scales_with_size ? law.bound * r : law.bound;
            residuals(i, k) = truncated_normal(rng, sd, bound);
        }
    }
    return reconstruct_from_residuals(model, residuals, sizes);
}

Eigen::MatrixXd add_ambient_noise(const Eigen::MatrixXd& data, double sigma,
                                  std::uint64_t seed) {
    if (!(sigma > 0.0)) throw DomainError("add_ambient_noise: sigma must be positive");
    Rng rng(seed);
    Eigen::MatrixXd out(data.rows(), data.cols());
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            for (Eigen::Index j = 0; j < data.rows(); ++j) {
                out(j, i) = data(j, i) + rng.normal(0.0, sigma);
            }
            ok = out.col(i).norm() >= kApexTol;
        }
        if (!ok) {
            std::ostringstream msg;
            msg << "add_ambient_noise: column " << i << " stayed at the apex after retries";
            throw NumericalError(msg.str());
        }
    }
    return out;
}

std::string generator_spec_to_json(const GeneratorSpec& spec) {
    nlohmann::json j;
    nlohmann::json axes = nlohmann::json::array();
    for (const Eigen::VectorXd& axis : spec.axes) {
        axes.push_back(std::vector<double>(axis.data(), axis.data() + axis.size()));
    }
    j["axes"] = std::move(axes);
    j["openings"] = spec.openings;
    j["size"] = {{"lo", spec.size_lo}, {"hi", spec.size_hi}};
    nlohmann::json laws = nlohmann::json::array();
    for (const ResidualLaw& law : spec.residual_laws) {
        laws.push_back({{"sd", law.sd},
                        {"sd_scales_with_size", law.sd_scales_with_size},
                        {"bound", law.bound},
                        {"bound_scales_with_size", law.bound_scales_with_size}});
    }
    j["residual_laws"] = std::move(laws);
    j["count"] = spec.count;
    j["seed"] = spec.seed;
    return j.dump(2);
}

GeneratorSpec generator_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator spec JSON: ") + e.what());
    }
    GeneratorSpec spec;
    try {
        for (const auto& axis : j.at("axes")) {
            const auto coords = axis.get<std::vector<double>>();
            spec.axes.push_back(Eigen::Map<const Eigen::VectorXd>(
                coords.data(), static_cast<Eigen::Index>(coords.size())));
        }
        spec.openings = j.at("openings").get<std::vector<double>>();
        spec.size_lo = j.at("size").at("lo").get<double>();
        spec.size_hi = j.at("size").at("hi").get<double>();
        for (const auto& law : j.at("residual_laws")) {
            spec.residual_laws.push_back(
                ResidualLaw{law.at("sd").get<double>(),
                            law.at("sd_scales_with_size").get<bool>(),
                            law.at("bound").get<double>(),
                            law.at("bound_scales_with_size").get<bool>()});
        }
        spec.count = j.at("count").get<int>();
        spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator spec JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

} // namespace pnc
