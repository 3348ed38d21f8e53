#include <doctest.h>

#include <algorithm>
#include <vector>

#include "pcreg/errors.hpp"
#include "pcreg/postprocess.hpp"
#include "pcreg/rng.hpp"
#include "pcreg/signal.hpp"

using namespace pcreg;

namespace {

Eigen::VectorXd step8() {
    Eigen::VectorXd v(8);
    v << 0, 0, 0, 0, 1, 1, 1, 1;
    return v;
}

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_SUITE("postprocess") {

TEST_CASE("candidate_set hand values") {
    CHECK(candidate_set({4}, 2, 8) == std::vector<int>{2, 4, 6});
    CHECK(candidate_set({}, 3, 20) == std::vector<int>{3, 17});
    CHECK(candidate_set({1}, 5, 20) == std::vector<int>{5, 6, 15});
    CHECK_THROWS_AS(candidate_set({}, 5, 9), parameter_error);
    CHECK_THROWS_AS(candidate_set({}, 0, 9), parameter_error);
}

TEST_CASE("mean_filter_stat window means") {
    CHECK(mean_filter_stat(step8(), 4, 2) == doctest::Approx(1.0));
    CHECK(mean_filter_stat(step8(), 2, 2) == doctest::Approx(0.0));
    CHECK(mean_filter_stat(Eigen::VectorXd::Constant(10, 3.7), 5, 3) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS(mean_filter_stat(step8(), 1, 2), parameter_error);
    CHECK_THROWS_AS(mean_filter_stat(step8(), 7, 2), parameter_error);
}

TEST_CASE("mean_filter keeps only statistics clearing the threshold") {
    CHECK(mean_filter(step8(), 2, 0.5) == std::vector<int>{4});
    CHECK(mean_filter(Eigen::VectorXd::Constant(12, 2.0), 2, 0.5).empty());

    Eigen::VectorXd two_step(12);
    two_step << 0, 0, 0, 0, 1, 1, 1, 1, 3, 3, 3, 3;
    CHECK(mean_filter(two_step, 2, 0.5) == std::vector<int>{4, 8});
}

TEST_CASE("time_filter groups by gap and takes lower medians") {
    CHECK(time_filter({10, 12, 50}, 5) == std::vector<int>{10, 50});
    CHECK(time_filter({42}, 1) == std::vector<int>{42});
    CHECK(time_filter({42}, 1000) == std::vector<int>{42});
    CHECK(time_filter({1, 2, 3, 4, 5}, 10) == std::vector<int>{3});
    CHECK(time_filter({}, 3).empty());
    CHECK_THROWS_AS(time_filter({1, 2}, 0), parameter_error);
}

TEST_CASE("time_filter is idempotent once gaps exceed t") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> s;
        int cur = 1;
        while (s.size() < 12 && cur < 500) {
            cur += 1 + int(rng.uniform_int(20));
            s.push_back(cur);
        }
        const int t = 1 + int(rng.uniform_int(8));
        const auto once = time_filter(s, t);
        // Survivors are one per group; their pairwise gaps exceed t, so a
        // second pass is the identity.
        CHECK(time_filter(once, t) == once);
    }
}

TEST_CASE("localise composes the stages at scale") {
    const PiecewiseSignal s = make_signal({500}, Eigen::Vector2d(0, 1), 1000);
    FilterConfig cfg{11, 0.5, 22};
    const ChangePointReport report = localise(s.values, cfg);
    CHECK(report.raw == std::vector<int>{500});
    CHECK(report.filtered == std::vector<int>{500});
    CHECK(report.pruned == std::vector<int>{500});
    CHECK(report.config.bandwidth == 11);
}

TEST_CASE("localise on a constant vector finds nothing") {
    const ChangePointReport report =
        localise(Eigen::VectorXd::Constant(100, 5.0), FilterConfig{4, 0.1, 8});
    CHECK(report.raw.empty());
    CHECK(report.filtered.empty());
    CHECK(report.pruned.empty());
}

TEST_CASE("localise validates its configuration") {
    const Eigen::VectorXd v = Eigen::VectorXd::Zero(10);
    CHECK_THROWS_AS(localise(v, FilterConfig{6, 0.5, 2}), parameter_error);
    CHECK_THROWS_AS(localise(v, FilterConfig{2, 0.0, 2}), parameter_error);
}

TEST_CASE("stage inclusions hold on random inputs") {
    Rng rng(91);
    for (int trial = 0; trial < 200; ++trial) {
        const int p = 12 + int(rng.uniform_int(80));
        Eigen::VectorXd x(p);
        double level = 0;
        for (int i = 0; i < p; ++i) {
            if (rng.uniform() < 0.1) level += rng.normal();
            x[i] = level + (rng.uniform() < 0.3 ? 0.01 * rng.normal() : 0.0);
        }
        const int b = 1 + int(rng.uniform_int(p / 2));
        const double tau = 0.05 + rng.uniform();
        const int t = 1 + int(rng.uniform_int(2 * b + 2));
        const ChangePointReport r = localise(x, FilterConfig{b, tau, t});
        const auto i_f = candidate_set(r.raw, b, p);
        CHECK(subset(r.filtered, i_f));
        CHECK(subset(r.pruned, r.filtered));
    }
}

TEST_CASE("mean filter shift invariance and threshold scaling") {
    Rng rng(17);
    Eigen::VectorXd x(40);
    for (int i = 0; i < 40; ++i) x[i] = rng.normal();
    const int b = 5;
    const double tau = 0.3;
    const auto base = mean_filter(x, b, tau);

    const Eigen::VectorXd shifted = (x.array() + 123.0).matrix();
    CHECK(mean_filter(shifted, b, tau) == base);

    const double c = 4.5;
    CHECK(mean_filter((c * x).eval(), b, c * tau) == base);
}

TEST_CASE("exact staircase with wide segments: pruned equals raw") {
    Rng rng(33);
    for (int trial = 0; trial < 30; ++trial) {
        const int b = 2 + int(rng.uniform_int(4));
        const int segments = 2 + int(rng.uniform_int(4));
        const int seg_len = 2 * b + 1 + int(rng.uniform_int(5));
        const int p = segments * seg_len;
        std::vector<int> boundaries;
        Eigen::VectorXd levels(segments);
        levels[0] = 0;
        for (int s = 1; s < segments; ++s) {
            boundaries.push_back(s * seg_len);
            levels[s] = levels[s - 1] + (rng.uniform() < 0.5 ? 1.0 : -1.0) *
                                            (1.0 + rng.uniform());
        }
        const PiecewiseSignal sig = make_signal(boundaries, levels, p);
        const double tau = 0.9;  // all jumps >= 1 > tau
        const ChangePointReport r = localise(sig.values, FilterConfig{b, tau, 2 * b});
        CHECK(r.raw == boundaries);
        CHECK(r.pruned == boundaries);
    }
}

}  // TEST_SUITE
