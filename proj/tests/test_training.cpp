#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "countermachine/model_io.hpp"
#include "countermachine/training.hpp"
#include "test_support.hpp"

using namespace cfm;

namespace {

Samples sample_model(const TskModel& model, int n, std::mt19937_64& rng) {
    Samples s{Eigen::MatrixXd(n, model.n_inputs()), Eigen::VectorXd(n)};
    for (int k = 0; k < n; ++k) {
        const auto x = test::random_point(rng, model.n_inputs());
        s.x.row(k) = x.transpose();
        s.t(k) = evaluate(model, x).y;
    }
    return s;
}

Samples threshold_data(int n, std::mt19937_64& rng) {
    Samples s{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
    for (int k = 0; k < n; ++k) {
        const auto x = test::random_point(rng, 2);
        s.x.row(k) = x.transpose();
        s.t(k) = 0.8 * x(0) + 0.2 * x(1) > 0.5 ? 1.0 : 0.0;
    }
    return s;
}

/// Grid model with jittered premises and random consequents; rules are distinct.
TskModel jittered_grid(std::mt19937_64& rng, int n_inputs) {
    const auto grid = init_grid(test::names(n_inputs), TrainConfig{});
    std::uniform_real_distribution<double> jitter(-0.1, 0.1), coeff(-1.0, 1.0);
    Eigen::VectorXd p = premise_parameters(grid);
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) += jitter(rng);
    Eigen::MatrixXd a(grid.n_rules(), n_inputs + 1);
    for (Eigen::Index k = 0; k < a.size(); ++k) a(k) = coeff(rng);
    return with_premise_parameters(grid, p).with_consequents(a);
}

/// Relative error with a floor so components that are both ~0 compare as equal.
double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST_CASE("init_grid") {
    TrainConfig cfg;
    SUBCASE("one input, two MFs") {
        const auto m = init_grid({"x"}, cfg);
        REQUIRE(m.memberships()[0].size() == 2);
        CHECK(m.memberships()[0][0].center == 0.0);
        CHECK(m.memberships()[0][1].center == 1.0);
        CHECK(m.memberships()[0][0].width == 0.5);
        CHECK(m.n_rules() == 2);
        CHECK(m.consequents().isZero());
    }
    SUBCASE("width formula") {
        cfg.mfs_per_input = 2;
        CHECK(init_grid({"x"}, cfg).memberships()[0][0].width == doctest::Approx(1.0 / (2.0 * (2 - 1))));
        cfg.mfs_per_input = 3;
        const auto m = init_grid({"x"}, cfg);
        CHECK(m.memberships()[0][1].center == 0.5);
        CHECK(m.memberships()[0][0].width == 0.25);
        cfg.mfs_per_input = 1;
        CHECK(init_grid({"x"}, cfg).memberships()[0][0].width == 0.5);
    }
    SUBCASE("seven inputs") {
        CHECK(init_grid(test::names(7), cfg).n_rules() == 128);
        cfg.mfs_per_input = 3;
        CHECK_THROWS_AS(init_grid(test::names(7), cfg), RuleCapExceeded);
        cfg.rule_cap = 2187;
        CHECK(init_grid(test::names(7), cfg).n_rules() == 2187);
    }
    SUBCASE("grid covers every index combination once") {
        cfg.mfs_per_input = 3;
        const auto m = init_grid(test::names(3), cfg);
        std::set<std::vector<Eigen::Index>> seen;
        for (const auto& r : m.rules()) seen.insert(r.mf_indices);
        CHECK(seen.size() == 27);
    }
}

TEST_CASE("lse_consequents") {
    std::mt19937_64 rng(11);

    SUBCASE("realizable target is recovered") {
        const auto truth = jittered_grid(rng, 2);
        const auto zeroed = truth.with_consequents(Eigen::MatrixXd::Zero(truth.n_rules(), 3));
        const auto data = sample_model(truth, 200, rng);
        const auto fitted = lse_consequents(zeroed, data, 0.0);
        CHECK(mean_squared_error(fitted, data) <= 1e-10);
    }
    SUBCASE("constant targets") {
        const TskModel m({"x"}, {{{0.5, 0.3}}}, {{{0}, Eigen::Vector2d::Zero()}});
        Samples data{Eigen::MatrixXd(4, 1), Eigen::VectorXd::Constant(4, 0.7)};
        data.x << 0.1, 0.4, 0.6, 0.9;
        const auto fitted = lse_consequents(m, data, 0.0);
        CHECK(fitted.consequents()(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(std::abs(fitted.consequents()(0, 1)) < 1e-12);
    }
    SUBCASE("hand-solved normal equations") {
        // x = 0, 0.5, 1; t = 0.1, 0.4, 0.6 -> slope 0.5, intercept 7/60.
        const TskModel m({"x"}, {{{0.5, 0.3}}}, {{{0}, Eigen::Vector2d::Zero()}});
        Samples data{Eigen::MatrixXd(3, 1), Eigen::Vector3d(0.1, 0.4, 0.6)};
        data.x << 0.0, 0.5, 1.0;
        const auto fitted = lse_consequents(m, data, 0.0);
        CHECK(fitted.consequents()(0, 0) == doctest::Approx(7.0 / 60.0).epsilon(1e-12));
        CHECK(fitted.consequents()(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
        const auto ridged = lse_consequents(m, data, 1e-6);
        CHECK(ridged.consequents()(0, 1) == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("rank deficiency") {
        const TskModel m({"x"}, {{{0.5, 0.3}}}, {{{0}, Eigen::Vector2d::Zero()}});
        Samples data{Eigen::MatrixXd::Constant(5, 1, 0.3), Eigen::VectorXd::LinSpaced(5, 0.0, 1.0)};
        CHECK_THROWS_AS(lse_consequents(m, data, 0.0), SingularSystem);
        CHECK_NOTHROW(lse_consequents(m, data, 1e-6));
    }
    SUBCASE("never increases loss at ridge 0") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto model = jittered_grid(rng, 2);
            Samples data = sample_model(test::random_model(rng, 2, 3, 5), 60, rng);
            const double before = mean_squared_error(model, data);
            const double after = mean_squared_error(lse_consequents(model, data, 0.0), data);
            CHECK(after <= before + 1e-15);
        }
    }
    SUBCASE("premises unchanged") {
        const auto model = test::random_model(rng, 2, 2, 3);
        const auto data = sample_model(model, 40, rng);
        CHECK(premise_parameters(lse_consequents(model, data, 1e-6)) == premise_parameters(model));
    }
    SUBCASE("errors") {
        const auto model = test::random_model(rng, 2, 2, 3);
        CHECK_THROWS_AS(lse_consequents(model, Samples{}, 1e-6), InvalidArgument);
        Samples wrong{Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3)};
        CHECK_THROWS_AS(lse_consequents(model, wrong, 1e-6), DimensionMismatch);
    }
}

TEST_CASE("premise gradient") {
    std::mt19937_64 rng(3);

    SUBCASE("matches central finite differences") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto model = test::random_model(rng, 1 + trial % 3, 2, 2 + trial % 5);
            const auto data = sample_model(test::random_model(rng, model.n_inputs(), 2, 3), 25, rng);
            const Eigen::VectorXd g = premise_gradient(model, data);
            const Eigen::VectorXd p = premise_parameters(model);
            const double h = 1e-6;
            double worst = 0.0;
            for (Eigen::Index k = 0; k < p.size(); ++k) {
                Eigen::VectorXd up = p, down = p;
                up(k) += h;
                down(k) -= h;
                const double fd = static_cast<double>(
                    (test::brute_force_mse(with_premise_parameters(model, up), data.x, data.t) -
                     test::brute_force_mse(with_premise_parameters(model, down), data.x, data.t)) /
                    (static_cast<long double>(up(k)) - down(k)));
                worst = std::max(worst, relative_error(g(k), fd));
            }
            CHECK(worst < 1e-4);
        }
    }
    SUBCASE("zero learning rate leaves the model unchanged") {
        const auto model = test::random_model(rng, 2, 2, 3);
        const auto data = sample_model(model, 10, rng);
        CHECK(serialize(premise_gradient_step(model, data, 0.0)) == serialize(model));
    }
    SUBCASE("widths are clamped") {
        const auto model = jittered_grid(rng, 2);
        const auto data = sample_model(test::random_model(rng, 2, 3, 5), 30, rng);
        const Eigen::VectorXd g = premise_gradient(model, data);
        const Eigen::VectorXd p = premise_parameters(model);
        const Eigen::Index half = p.size() / 2;
        Eigen::Index k = 0;
        g.tail(half).maxCoeff(&k);
        REQUIRE(g(half + k) > 0.0);
        // Step far enough to push that width through zero.
        const double lr = 2.0 * p(half + k) / g(half + k);
        const Eigen::VectorXd stepped = premise_parameters(premise_gradient_step(model, data, lr));
        CHECK(stepped(half + k) == kMinWidth);
        CHECK((stepped.tail(half).array() >= kMinWidth).all());
    }
}

TEST_CASE("fit") {
    std::mt19937_64 rng(5);

    SUBCASE("threshold concept generalizes") {
        const auto train = threshold_data(600, rng);
        const auto test_set = threshold_data(400, rng);
        TrainConfig cfg;
        const auto result = fit(train, test_set, {"x1", "x2"}, cfg);
        CHECK(result.report.test_acc >= 0.9);
        CHECK(result.report.loss.size() == static_cast<std::size_t>(cfg.epochs));
        for (double l : result.report.loss) CHECK((std::isfinite(l) && l >= 0.0));
    }
    SUBCASE("realizable targets") {
        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.ridge_lambda = 0.0;  // exact recovery needs an unbiased fit
        auto truth = init_grid({"a", "b"}, cfg);
        Eigen::MatrixXd coeffs(truth.n_rules(), 3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) = u(rng);
        truth = truth.with_consequents(coeffs);
        const auto data = sample_model(truth, 150, rng);
        const auto result = fit(data, data, {"a", "b"}, cfg);
        CHECK(*std::min_element(result.report.loss.begin(), result.report.loss.end()) < 1e-4);
        CHECK(mean_squared_error(result.model, data) < 1e-4);
    }
    SUBCASE("deterministic") {
        const auto train = threshold_data(200, rng);
        const auto test_set = threshold_data(100, rng);
        TrainConfig cfg;
        cfg.epochs = 6;
        cfg.seed = 42;
        const auto a = fit(train, test_set, {"x1", "x2"}, cfg);
        const auto b = fit(train, test_set, {"x1", "x2"}, cfg);
        CHECK(serialize(a.model) == serialize(b.model));
        CHECK(to_json(a.report).dump() == to_json(b.report).dump());
    }
    SUBCASE("report json") {
        const TrainReport r{{0.5, 0.25}, 0.75, 0.5};
        CHECK(to_json(r).dump() == R"({"loss":[0.5,0.25],"test_acc":0.5,"train_acc":0.75})");
    }
    SUBCASE("rule cap propagates") {
        TrainConfig cfg;
        cfg.mfs_per_input = 3;
        Samples data{Eigen::MatrixXd::Constant(4, 7, 0.5), Eigen::VectorXd::Zero(4)};
        CHECK_THROWS_AS(fit(data, data, test::names(7), cfg), RuleCapExceeded);
    }
}
