#include <doctest.h>

#include <cmath>

#include "pnc/fit.hpp"
#include "pnc/model.hpp"
#include "test_support.hpp"

using namespace pnc;
using namespace pnc::testing;

TEST_CASE("model JSON round trip is bit-faithful") {
    Rng rng(201);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 5, 40, 0.6, 0.25);
    const auto [model, scores] = fit(data, ResidualKind::Chordal, {});

    const std::string text = model_to_json(model);
    const PncModel parsed = model_from_json(text);
    CHECK(parsed.ambient_dim == model.ambient_dim);
    CHECK(parsed.residual_kind == model.residual_kind);
    REQUIRE(parsed.stages.size() == model.stages.size());
    for (std::size_t k = 0; k < model.stages.size(); ++k) {
        CHECK(parsed.stages[k].opening == model.stages[k].opening);
        for (Eigen::Index j = 0; j < model.stages[k].axis.size(); ++j) {
            CHECK(parsed.stages[k].axis(j) == model.stages[k].axis(j));
        }
    }
    CHECK(parsed.final_reference_angle() == model.final_reference_angle());
    // idempotent: serialize(parse(text)) == text
    CHECK(model_to_json(parsed) == text);
}

TEST_CASE("model JSON validation") {
    CHECK_THROWS_AS(model_from_json("not json"), ParseError);
    CHECK_THROWS_AS(model_from_json("{}"), ParseError);
    // stage lengths must shrink by one
    CHECK_THROWS_AS(
        model_from_json(R"({"ambient_dim":3,"residual_kind":"riemannian",
            "stages":[{"axis":[1.0,0.0],"opening":0.4},{"axis":[1.0,0.0],"opening":0.0}]})"),
        DimensionError);
    // final opening must be exactly zero
    CHECK_THROWS_AS(
        model_from_json(R"({"ambient_dim":3,"residual_kind":"riemannian",
            "stages":[{"axis":[1.0,0.0,0.0],"opening":0.4},{"axis":[1.0,0.0],"opening":0.1}]})"),
        DomainError);
    CHECK_THROWS_AS(residual_kind_from_name("euclidean"), ParseError);
}

TEST_CASE("final reference angle is the positive angle of the last axis") {
    PncModel model;
    model.ambient_dim = 3;
    Eigen::VectorXd v1(3);
    v1 << 0.0, 0.0, 1.0;
    Eigen::VectorXd v2(2);
    v2 << 0.0, -1.0;
    model.stages.emplace_back(v1, 0.5);
    model.stages.emplace_back(v2, 0.0);
    model.finalize();
    CHECK(model.final_reference_angle() == doctest::Approx(1.5 * kPi).epsilon(1e-12));
}
