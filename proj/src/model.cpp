#include "pnc/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace pnc {

namespace {
constexpr double kPi = std::numbers::pi;
}

void OptimizerConfig::validate() const {
    if (max_iters < 1) throw DomainError("OptimizerConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw DomainError("OptimizerConfig: tol must be positive");
    if (restarts < 1) throw DomainError("OptimizerConfig: restarts must be >= 1");
}

int PncModel::free_parameter_count() const {
    const int dd = d();
    return dd * (dd + 5) / 2 - 1;
}

double PncModel::scale_factor(int stage) const {
    double f = 1.0;
    for (int i = 0; i + 1 < stage; ++i) {
        f *= std::sin(stages[static_cast<std::size_t>(i)].opening);
    }
    return f;
}

void PncModel::finalize() {
    const int dd = d();
    if (ambient_dim < 3) {
        throw DimensionError("PncModel: ambient dimension must be >= 3");
    }
    if (static_cast<int>(stages.size()) != dd) {
        std::ostringstream msg;
        msg << "PncModel: expected " << dd << " stages, got " << stages.size();
        throw DimensionError(msg.str());
    }
    for (int k = 1; k <= dd; ++k) {
        const HyperconeStage& st = stages[static_cast<std::size_t>(k - 1)];
        const Eigen::Index want = ambient_dim + 1 - k;
        if (st.axis.size() != want) {
            std::ostringstream msg;
            msg << "PncModel: stage " << k << " axis has length " << st.axis.size()
                << ", expected " << want;
            throw DimensionError(msg.str());
        }
        if (std::abs(st.axis.norm() - 1.0) > 1e-10) {
            throw DomainError("PncModel: stage axis is not unit length");
        }
        if (st.opening < 0.0 || st.opening > kPi / 2) {
            throw DomainError("PncModel: opening outside [0, pi/2]");
        }
    }
    if (stages.back().opening != 0.0) {
        throw DomainError("PncModel: final stage opening must be exactly 0");
    }
    const Eigen::VectorXd& vd = stages.back().axis;
    double phi = std::atan2(vd(1), vd(0));
    if (phi < 0.0) phi += 2.0 * kPi;
    final_reference_angle_ = phi;
}

std::string residual_kind_name(ResidualKind kind) {
    return kind == ResidualKind::Riemannian ? "riemannian" : "chordal";
}

ResidualKind residual_kind_from_name(const std::string& name) {
    if (name == "riemannian") return ResidualKind::Riemannian;
    if (name == "chordal") return ResidualKind::Chordal;
    throw ParseError("unknown residual kind: " + name);
}

std::string model_to_json(const PncModel& model) {
    nlohmann::json j;
    j["ambient_dim"] = model.ambient_dim;
    j["residual_kind"] = residual_kind_name(model.residual_kind);
    nlohmann::json stages = nlohmann::json::array();
    for (const HyperconeStage& st : model.stages) {
        nlohmann::json s;
        s["axis"] = std::vector<double>(st.axis.data(), st.axis.data() + st.axis.size());
        s["opening"] = st.opening;
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    return j.dump(2);
}

PncModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    PncModel model;
    try {
        model.ambient_dim = j.at("ambient_dim").get<int>();
        model.residual_kind = residual_kind_from_name(j.at("residual_kind").get<std::string>());
        for (const auto& s : j.at("stages")) {
            const auto coords = s.at("axis").get<std::vector<double>>();
            HyperconeStage st;
            st.axis = Eigen::Map<const Eigen::VectorXd>(coords.data(),
                                                        static_cast<Eigen::Index>(coords.size()));
            st.opening = s.at("opening").get<double>();
            model.stages.push_back(std::move(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    model.finalize();
    return model;
}

} // namespace pnc
