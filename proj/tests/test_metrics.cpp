#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcreg/errors.hpp"
#include "pcreg/metrics.hpp"
#include "pcreg/postprocess.hpp"
#include "pcreg/rng.hpp"
#include "pcreg/signal.hpp"

using namespace pcreg;

namespace {

std::vector<int> random_set(Rng& rng, int p, bool allow_empty) {
    std::vector<int> s;
    for (int i = 1; i < p; ++i)
        if (rng.uniform() < 0.15) s.push_back(i);
    if (s.empty() && !allow_empty) s.push_back(1 + int(rng.uniform_int(p - 1)));
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("one_sided hand values and empty-set convention") {
    CHECK(one_sided({7}, {7}, 100) == 0);
    CHECK(one_sided({}, {5}, 1000) == 1000);
    CHECK(one_sided({5}, {}, 1000) == 1000);
    CHECK(one_sided({}, {}, 1000) == 0);
    CHECK(one_sided({10, 90}, {50}, 1000) == 40);
}

TEST_CASE("one_sided is asymmetric in general") {
    CHECK(one_sided({10}, {10, 90}, 1000) == 80);
    CHECK(one_sided({10, 90}, {10}, 1000) == 0);
}

TEST_CASE("hausdorff hand values") {
    CHECK(hausdorff({3, 9}, {3, 9}, 50) == 0);
    CHECK(hausdorff({10}, {20}, 100) == 10);
    CHECK(hausdorff({}, {}, 100) == 0);
    CHECK(hausdorff({}, {4}, 100) == 100);
}

TEST_CASE("hausdorff axioms on random nonempty sets") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = 30;
        const auto a = random_set(rng, p, false);
        const auto b = random_set(rng, p, false);
        const auto c = random_set(rng, p, false);
        const double hab = hausdorff(a, b, p);
        CHECK(hab == hausdorff(b, a, p));                       // symmetry
        CHECK(hausdorff(a, a, p) == 0);                         // identity
        if (hab == 0) CHECK(a == b);                            // separation
        CHECK(hab <= hausdorff(a, c, p) + hausdorff(c, b, p));  // triangle
        CHECK(hab <= p);
        CHECK(hab == std::max(one_sided(a, b, p), one_sided(b, a, p)));
    }
}

TEST_CASE("evaluate_at zero case and constant shift") {
    const PiecewiseSignal truth = make_signal({4, 8}, Eigen::Vector3d(0, 2, 1), 12);
    const std::vector<int> cps = truth.change_points;

    const EvalResult same = evaluate_at(truth.values, truth.values, cps, cps, 12);
    CHECK(same.coef_sq_error == 0);
    CHECK(same.d_est_given_true == 0);
    CHECK(same.d_true_given_est == 0);
    CHECK(same.hausdorff_dist == 0);
    CHECK(same.count_error == 0);
    CHECK_FALSE(same.pred_mse.has_value());

    const double c = 0.75;
    const Eigen::VectorXd shifted = (truth.values.array() + c).matrix();
    const EvalResult shift = evaluate_at(shifted, truth.values, cps, cps, 12);
    CHECK(shift.coef_sq_error == doctest::Approx(12 * c * c).epsilon(1e-12));
    CHECK(shift.coef_sq_error_per_p == doctest::Approx(c * c).epsilon(1e-12));
    CHECK(shift.hausdorff_dist == 0);
}

TEST_CASE("evaluate_at against an independently coded loop") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int p = 15;
        Eigen::VectorXd xhat(p), xstar(p);
        for (int i = 0; i < p; ++i) {
            xhat[i] = rng.normal();
            xstar[i] = rng.normal();
        }
        const auto est = random_set(rng, p, true);
        const auto tru = random_set(rng, p, true);
        const EvalResult r = evaluate_at(xhat, xstar, est, tru, p);

        double sq = 0;
        for (int i = 0; i < p; ++i) sq += (xhat[i] - xstar[i]) * (xhat[i] - xstar[i]);
        CHECK(r.coef_sq_error == doctest::Approx(sq).epsilon(1e-12));

        auto scalar_one_sided = [p](const std::vector<int>& m1,
                                    const std::vector<int>& m2) -> double {
            if (m1.empty() && m2.empty()) return 0;
            if (m1.empty() || m2.empty()) return p;
            double worst = 0;
            for (int b : m2) {
                double best = 1e300;
                for (int a : m1) best = std::min(best, double(std::abs(a - b)));
                worst = std::max(worst, best);
            }
            return worst;
        };
        CHECK(r.d_est_given_true == doctest::Approx(scalar_one_sided(est, tru)));
        CHECK(r.d_true_given_est == doctest::Approx(scalar_one_sided(tru, est)));
        CHECK(r.count_error == std::abs(int(est.size()) - int(tru.size())));
    }
}

TEST_CASE("prediction error only with test data, dims enforced") {
    Eigen::VectorXd xhat(3), xstar(3);
    xhat << 1, 2, 3;
    xstar << 1, 2, 3;

    std::optional<TestData> test(TestData{});
    test->A = Eigen::MatrixXd::Identity(3, 3);
    test->y = Eigen::VectorXd::Zero(3);
    test->y << 1, 2, 4;
    const EvalResult r = evaluate_at(xhat, xstar, {}, {}, 3, test);
    REQUIRE(r.pred_mse.has_value());
    CHECK(*r.pred_mse == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    std::optional<TestData> bad(TestData{});
    bad->A = Eigen::MatrixXd::Identity(4, 4);
    bad->y = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(evaluate_at(xhat, xstar, {}, {}, 3, bad), dimension_error);

    Eigen::VectorXd short_star(2);
    short_star << 1, 2;
    CHECK_THROWS_AS(evaluate_at(xhat, short_star, {}, {}, 3), dimension_error);
}

TEST_CASE("evaluate uses the pruned stage for counting") {
    const PiecewiseSignal truth = make_signal({6}, Eigen::Vector2d(0, 1), 12);
    ChangePointReport report;
    report.raw = {2, 6, 9};
    report.filtered = {6, 9};
    report.pruned = {6};
    const EvalResult r = evaluate(truth.values, truth.values, report);
    CHECK(r.count_error == 0);          // pruned size 1 vs one true point
    CHECK(r.d_est_given_true == 0);
    CHECK(r.hausdorff_dist == 0);
}

}  // TEST_SUITE
