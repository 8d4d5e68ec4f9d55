#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pnc/backfit.hpp"
#include "pnc/fit.hpp"
#include "pnc/simulate.hpp"
#include "test_support.hpp"

using namespace pnc;
using namespace pnc::testing;

TEST_CASE("stage objective: zero on the cone, angular form at unit size, c^2 scaling") {
    Rng rng(101);
    const Eigen::VectorXd axis = random_unit(rng, 4);
    const double alpha = 0.6;
    Eigen::MatrixXd on(4, 30);
    for (int i = 0; i < 30; ++i) on.col(i) = random_on_cone(rng, axis, alpha, rng.uniform(1.0, 2.0));
    CHECK(stage_objective(on, axis, alpha, ResidualKind::Riemannian) < 1e-18);

    Eigen::MatrixXd unit_cloud(4, 50);
    for (int i = 0; i < 50; ++i) unit_cloud.col(i) = random_unit(rng, 4);
    double direct = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double theta = angle_between(unit_cloud.col(i), axis);
        direct += (theta - alpha) * (theta - alpha);
    }
    CHECK(stage_objective(unit_cloud, axis, alpha, ResidualKind::Riemannian) ==
          doctest::Approx(direct).epsilon(1e-12));

    const double q1 = stage_objective(unit_cloud, axis, alpha, ResidualKind::Chordal);
    const double q3 = stage_objective(3.0 * unit_cloud, axis, alpha, ResidualKind::Chordal);
    CHECK(q3 == doctest::Approx(9.0 * q1).epsilon(1e-12));
}

TEST_CASE("stage objective edge cases") {
    Eigen::MatrixXd data(2, 3);
    data << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;
    Eigen::VectorXd axis(2);
    axis << 1.0, 0.0;
    CHECK(stage_objective(data, axis, 0.0, ResidualKind::Riemannian) > 0.0);
    CHECK_THROWS_AS(stage_objective(data, axis, 0.3, ResidualKind::Riemannian), DomainError);

    Eigen::MatrixXd with_apex(3, 2);
    with_apex << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0;
    Eigen::VectorXd axis3(3);
    axis3 << 0.0, 0.0, 1.0;
    try {
        stage_objective(with_apex, axis3, 0.4, ResidualKind::Riemannian);
        FAIL("expected ApexError");
    } catch (const ApexError& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("stage fit recovers a noiseless cone to 1e-4") {
    Rng rng(102);
    const Eigen::VectorXd axis = random_unit(rng, 4);
    const double alpha = 0.55;
    Eigen::MatrixXd data(4, 120);
    for (int i = 0; i < 120; ++i) {
        data.col(i) = random_on_cone(rng, axis, alpha, rng.uniform(0.5, 2.5));
    }
    const StageFit sf = fit_stage(data, ResidualKind::Riemannian, {});
    CHECK(angle_between(sf.stage.axis, axis) < 1e-4);
    CHECK(std::abs(sf.stage.opening - alpha) < 1e-4);
    CHECK(sf.diagnostics.objective < 1e-12);
}

TEST_CASE("stage fit handles identical directions") {
    Eigen::VectorXd dir(4);
    dir << 0.5, 0.5, 0.5, 0.5;
    Eigen::MatrixXd data(4, 5);
    for (int i = 0; i < 5; ++i) data.col(i) = (1.0 + i) * dir;
    const StageFit sf = fit_stage(data, ResidualKind::Riemannian, {});
    CHECK(angle_between(sf.stage.axis, dir) < 1e-12);
    CHECK(sf.stage.opening == 0.0);
    CHECK(sf.diagnostics.objective == 0.0);
}

TEST_CASE("final-stage fit matches a dense grid search on symmetric data") {
    const double base = 1.1;
    const double offset = 0.4;
    Eigen::MatrixXd data(2, 2);
    data.col(0) << 2.0 * std::cos(base + offset), 2.0 * std::sin(base + offset);
    data.col(1) << 2.0 * std::cos(base - offset), 2.0 * std::sin(base - offset);
    const StageFit sf = fit_stage(data, ResidualKind::Riemannian, {});
    CHECK(sf.stage.opening == 0.0);

    const double fitted = stage_objective(data, sf.stage.axis, 0.0, ResidualKind::Riemannian);
    double grid_best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < 3600; ++g) {
        Eigen::VectorXd cand(2);
        const double phi = 2.0 * kPi * g / 3600;
        cand << std::cos(phi), std::sin(phi);
        grid_best = std::min(grid_best,
                             stage_objective(data, cand, 0.0, ResidualKind::Riemannian));
    }
    CHECK(fitted <= grid_best + 1e-12);
    // The bisecting ray is the unique interior minimizer here.
    CHECK(std::atan2(sf.stage.axis(1), sf.stage.axis(0)) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("fit produces the documented shapes and parameter count") {
    Rng rng(103);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 3, 40, 0.7, 0.2);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});
    CHECK(model.d() == 2);
    CHECK(model.free_parameter_count() == 6);
    CHECK(model.stages[0].axis.size() == 3);
    CHECK(model.stages[1].axis.size() == 2);
    CHECK(model.stages[1].opening == 0.0);
    CHECK(scores.scores.rows() == 40);
    CHECK(scores.scores.cols() == 2);
    CHECK(scores.scale_factors(0) == 1.0); // empty product
    CHECK(scores.scale_factors(1) == doctest::Approx(std::sin(model.stages[0].opening)));

    // Parameter count identity against the stagewise sum.
    for (int d = 2; d <= 8; ++d) {
        int total = d - 1;
        for (int k = 1; k <= d; ++k) total += d + 2 - k;
        PncModel m;
        m.ambient_dim = d + 1;
        CHECK(m.free_parameter_count() == total);
    }
}

TEST_CASE("transform reproduces fit-time scores exactly and scales with the data") {
    Rng rng(104);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 4, 35, 0.6, 0.25);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});

    const ScoreMatrix again = transform(model, data);
    CHECK((again.scores - scores.scores).cwiseAbs().maxCoeff() == 0.0);
    CHECK((again.sizes - scores.sizes).cwiseAbs().maxCoeff() == 0.0);

    const ScoreMatrix scaled = transform(model, 2.0 * data);
    CHECK((scaled.scores - 2.0 * scores.scores).cwiseAbs().maxCoeff() <
          1e-9 * scores.scores.cwiseAbs().maxCoeff());

    Eigen::MatrixXd wrong(5, 3);
    wrong.setOnes();
    CHECK_THROWS_AS(transform(model, wrong), DimensionError);
}

TEST_CASE("data generated with zero residuals fits with zero scores") {
    Rng rng(105);
    GeneratorSpec spec = table_design(30, 9);
    // zero-variance laws: tiny sd, generous bounds
    for (ResidualLaw& law : spec.residual_laws) {
        law.sd = 1e-300;
        law.sd_scales_with_size = false;
    }
    const Eigen::MatrixXd data = sample_from_model(spec);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});
    CHECK(scores.scores.cwiseAbs().maxCoeff() < 1e-8);
    for (const StageDiagnostics& diag : model.fit_diagnostics) {
        CHECK(diag.objective < 1e-12);
    }
}

TEST_CASE("a point on every fitted cone gets an all-zero score row") {
    Rng rng(106);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 4, 30, 0.8, 0.2);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});

    ReconstructionRequest req;
    req.scores = Eigen::MatrixXd::Zero(1, model.d());
    req.sizes = Eigen::VectorXd::Constant(1, 2.0);
    req.keep = model.d();
    const Eigen::MatrixXd on_all = backfit(model, req);
    const ScoreMatrix s = transform(model, on_all);
    CHECK(s.scores.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fit is deterministic") {
    Rng rng(107);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 4, 50, 0.5, 0.3);
    const auto [m1, s1] = fit(data, ResidualKind::Chordal, {});
    const auto [m2, s2] = fit(data, ResidualKind::Chordal, {});
    for (std::size_t k = 0; k < m1.stages.size(); ++k) {
        CHECK((m1.stages[k].axis - m2.stages[k].axis).cwiseAbs().maxCoeff() == 0.0);
        CHECK(m1.stages[k].opening == m2.stages[k].opening);
    }
    CHECK((s1.scores - s2.scores).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the optimizer never ends above its initialization") {
    Rng rng(108);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Index m = 3 + static_cast<Eigen::Index>(rng.index(3));
        Eigen::MatrixXd data(m, 60);
        for (Eigen::Index i = 0; i < 60; ++i) {
            Eigen::VectorXd raw(m);
            for (Eigen::Index j = 0; j < m; ++j) raw(j) = rng.normal();
            data.col(i) = rng.uniform(0.5, 2.0) * raw.normalized();
        }
        Eigen::VectorXd mean_dir = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < 60; ++i) mean_dir += data.col(i) / data.col(i).norm();
        mean_dir.normalize();
        double alpha0 = 0.0;
        for (Eigen::Index i = 0; i < 60; ++i) {
            alpha0 += angle_between(data.col(i), mean_dir);
        }
        alpha0 /= 60.0;
        if (alpha0 > kPi / 2) {
            mean_dir = -mean_dir;
            alpha0 = kPi - alpha0;
        }
        const double q_init =
            stage_objective(data, mean_dir, alpha0, ResidualKind::Riemannian);
        const StageFit sf = fit_stage(data, ResidualKind::Riemannian, {});
        CHECK(sf.diagnostics.objective <= q_init + 1e-12);
    }
}

TEST_CASE("fitted stage parameters are invariant under data scaling") {
    Rng rng(109);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 4, 60, 0.7, 0.25);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});
    for (double c : {0.1, 3.0, 100.0}) {
        const auto [scaled_model, scaled_scores] = fit(c * data, ResidualKind::Riemannian, {});
        for (std::size_t k = 0; k < model.stages.size(); ++k) {
            CHECK(angle_between(model.stages[k].axis, scaled_model.stages[k].axis) < 1e-9);
            CHECK(std::abs(model.stages[k].opening - scaled_model.stages[k].opening) < 1e-9);
        }
        const double rel = ((scaled_scores.scores - c * scores.scores).cwiseAbs().maxCoeff()) /
                           (c * scores.scores.cwiseAbs().maxCoeff());
        CHECK(rel < 1e-9);
    }
}

TEST_CASE("polar scores: alignment, identity and seam continuity") {
    Rng rng(110);
    const Eigen::MatrixXd data = random_cone_cloud(rng, 3, 30, 0.6, 0.2);
    const auto [model, scores] = fit(data, ResidualKind::Riemannian, {});
    const Eigen::VectorXd axis = model.stages.back().axis;

    Eigen::MatrixXd rep(2, 4);
    rep.col(0) = 2.0 * axis; // beta = 0
    const double delta = 1e-3;
    const double phi = std::atan2(axis(1), axis(0));
    rep.col(1) << 1.5 * std::cos(phi + delta), 1.5 * std::sin(phi + delta);
    rep.col(2) << 1.5 * std::cos(phi - delta), 1.5 * std::sin(phi - delta);
    rep.col(3) << 3.0 * std::cos(phi + 2.0), 3.0 * std::sin(phi + 2.0);

    const PolarScores polar = polar_scores(model, rep);
    CHECK(polar.sx(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(polar.sy(0) == doctest::Approx(0.0).scale(1));
    for (int i = 0; i < 4; ++i) {
        const double r = rep.col(i).norm();
        CHECK(polar.sx(i) * polar.sx(i) + polar.sy(i) * polar.sy(i) ==
              doctest::Approx(r * r).epsilon(1e-10));
    }
    // The two near-seam observations have nearly equal polar scores even
    // though their signed final-stage scores have opposite signs.
    const double gap = std::hypot(polar.sx(1) - polar.sx(2), polar.sy(1) - polar.sy(2));
    CHECK(gap < 5.0 * delta);
    const double signed1 = signed_angle_2d(ConePoint(rep.col(1)), axis);
    const double signed2 = signed_angle_2d(ConePoint(rep.col(2)), axis);
    CHECK(signed1 * signed2 < 0.0);
}

TEST_CASE("variance explained shares") {
    ScoreMatrix sm;
    sm.scores = Eigen::MatrixXd::Zero(4, 3);
    sm.scores.col(0) << 1.0, -1.0, 2.0, 0.5;
    Eigen::VectorXd shares = variance_explained(sm);
    CHECK(shares(0) == doctest::Approx(1.0));
    CHECK(shares(1) == doctest::Approx(0.0));

    sm.scores.setOnes();
    shares = variance_explained(sm);
    for (int j = 0; j < 3; ++j) CHECK(shares(j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(shares.sum() == doctest::Approx(1.0).epsilon(1e-12));

    sm.scores.setZero();
    CHECK_THROWS_AS(variance_explained(sm), DomainError);
}

TEST_CASE("fit input validation") {
    Eigen::MatrixXd two_rows(2, 5);
    two_rows.setOnes();
    CHECK_THROWS_AS(fit(two_rows, ResidualKind::Riemannian, {}), DimensionError);

    Eigen::MatrixXd one_col(3, 1);
    one_col.setOnes();
    CHECK_THROWS_AS(fit(one_col, ResidualKind::Riemannian, {}), DimensionError);

    Eigen::MatrixXd with_apex(3, 3);
    with_apex.setOnes();
    with_apex.col(1).setZero();
    CHECK_THROWS_AS(fit(with_apex, ResidualKind::Riemannian, {}), ApexError);

    OptimizerConfig bad;
    bad.max_iters = 0;
    Eigen::MatrixXd ok(3, 4);
    ok.setRandom();
    CHECK_THROWS_AS(fit(ok, ResidualKind::Riemannian, bad), DomainError);
}
