#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pcreg/design.hpp"
#include "pcreg/errors.hpp"
#include "pcreg/ric.hpp"
#include "pcreg/signal.hpp"

using namespace pcreg;

TEST_SUITE("ric") {

TEST_CASE("sampler rejects bad arguments") {
    CHECK_THROWS_AS(sample_constraint_set(0, 1.0, 5, 1), parameter_error);
    CHECK_THROWS_AS(sample_constraint_set(8, -0.1, 5, 1), parameter_error);
    CHECK_THROWS_AS(sample_constraint_set(8, 1.0, 0, 1), parameter_error);
}

TEST_CASE("a zero tv budget admits only the signed constant vector") {
    const auto vs = sample_constraint_set(9, 0.0, 50, 13);
    REQUIRE(vs.size() == 50);
    const double c = 1.0 / 3.0;
    bool saw_plus = false, saw_minus = false;
    for (const auto& v : vs) {
        REQUIRE(v.size() == 9);
        const double s = v[0] > 0 ? 1.0 : -1.0;
        (s > 0 ? saw_plus : saw_minus) = true;
        for (int i = 0; i < 9; ++i) CHECK(v[i] == doctest::Approx(s * c).epsilon(1e-10));
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("every sample is unit norm and inside the tv budget") {
    for (double t : {0.05, 0.8, 3.0}) {
        for (int p : {2, 7, 40}) {
            const auto vs = sample_constraint_set(p, t, 60, 17);
            for (const auto& v : vs) {
                CHECK(std::abs(v.norm() - 1.0) <= 1e-10);
                CHECK(total_variation(v) <= t + 1e-10);
            }
        }
    }
}

TEST_CASE("a slack budget lets samples reach the extreme sphere tv") {
    // At p = 4 the largest TV on the unit sphere is sqrt(10), attained by the
    // alternating pattern whose difference signs are (+,-,+); any budget above
    // that leaves the sphere unconstrained.
    const double sphere_max = std::sqrt(10.0);
    const auto vs = sample_constraint_set(4, 10.0, 1000, 1);
    double best = 0.0;
    for (const auto& v : vs) best = std::max(best, total_variation(v));
    CHECK(best <= sphere_max + 1e-9);
    CHECK(best > 0.9 * sphere_max);
}

TEST_CASE("identity design pins the envelope at one") {
    const DesignMatrix I = identity_design(30);
    const RicCertificate cert = empirical_ric(I, 1.5, 200, 7);
    CHECK(cert.min_norm == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cert.max_norm == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cert.t == 1.5);
    CHECK(cert.samples == 200);
}

TEST_CASE("zero design collapses the envelope to zero") {
    DesignMatrix z;
    z.data = Eigen::MatrixXd::Zero(10, 6);
    z.family = DesignFamily::External;
    const RicCertificate cert = empirical_ric(z, 1.0, 50, 3);
    CHECK(cert.min_norm == 0.0);
    CHECK(cert.max_norm == 0.0);
}

TEST_CASE("witnesses are feasible and reproduce the reported norms") {
    const DesignMatrix A = gaussian_design(80, 25, {}, 55, true);
    const double t = 1.2;
    const RicCertificate cert = empirical_ric(A, t, 150, 9);
    for (const Eigen::VectorXd* w : {&cert.min_witness, &cert.max_witness}) {
        CHECK(std::abs(w->norm() - 1.0) <= 1e-9);
        CHECK(total_variation(*w) <= t + 1e-8);
    }
    CHECK((A.data * cert.min_witness).norm() == doctest::Approx(cert.min_norm).epsilon(1e-9));
    CHECK((A.data * cert.max_witness).norm() == doctest::Approx(cert.max_norm).epsilon(1e-9));
    CHECK(cert.min_norm <= cert.max_norm);
}

TEST_CASE("the envelope widens with the tv budget") {
    const DesignMatrix A = gaussian_design(60, 30, {}, 99, true);
    const RicCertificate narrow = empirical_ric(A, 0.5, 300, 3);
    const RicCertificate wide = empirical_ric(A, 2.0, 300, 3);
    CHECK(wide.min_norm <= narrow.min_norm + 0.02);
    CHECK(wide.max_norm >= narrow.max_norm - 0.02);
}

TEST_CASE("a well-conditioned scaled design lands inside the reference interval") {
    const DesignMatrix A = gaussian_design(400, 50, {}, 2024, true);
    RicCertificate cert = empirical_ric(A, 2.0, 200, 5);
    check_interval(cert, 0.0, 0.1);
    REQUIRE(cert.interval_ok.has_value());
    CHECK(*cert.interval_ok);
    REQUIRE(cert.zeta.has_value());
    CHECK(*cert.zeta == 0.0);
    const double lo = 1.0 - 1.0 / std::sqrt(2.0) - 0.1;
    const double hi = 1.0 + 1.0 / std::sqrt(2.0) + 0.1;
    CHECK(cert.min_norm > lo);
    CHECK(cert.max_norm < hi);
}

TEST_CASE("interval check marks both sides of the boundary") {
    const double z = 0.25, m = 0.0;
    const double lo = 1.0 - z - (1.0 - z) / std::sqrt(2.0) - m;
    const double hi = 1.0 + z + (1.0 - z) / std::sqrt(2.0) + m;

    RicCertificate inside;
    inside.min_norm = lo + 1e-6;
    inside.max_norm = hi - 1e-6;
    check_interval(inside, z, m);
    CHECK(*inside.interval_ok);

    RicCertificate low;
    low.min_norm = lo - 1e-6;
    low.max_norm = hi - 1e-6;
    check_interval(low, z, m);
    CHECK_FALSE(*low.interval_ok);

    RicCertificate high;
    high.min_norm = lo + 1e-6;
    high.max_norm = hi + 1e-6;
    check_interval(high, z, m);
    CHECK_FALSE(*high.interval_ok);
}

}  // TEST_SUITE
