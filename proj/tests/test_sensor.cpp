#include <doctest.h>

#include <cmath>
#include <random>

#include "singular_sense/errors.hpp"
#include "singular_sense/sensor.hpp"

using namespace singular_sense;
using cd = std::complex<double>;

namespace {
SensorParams make(double g, double g1, double g2, double omega0 = 0.0, double omega = 0.0) {
    SensorParams p;
    p.g = g;
    p.gamma1 = g1;
    p.gamma2 = g2;
    p.kappa = 1.0;
    p.omega0 = omega0;
    p.omega = omega;
    return p;
}
}  // namespace

TEST_CASE("build_generator") {
    const Mat2c h = build_generator(make(1, 1, 1));
    CHECK(h(0, 0) == cd(0, -1));
    CHECK(h(0, 1) == cd(1, 0));
    CHECK(h(1, 1) == cd(0, 1));
    CHECK(std::abs(h.determinant()) < 1e-15);

    const Mat2c h2 = build_generator(make(1, 1, 0.25));
    CHECK(std::abs(phase_space_rep(h2).determinant() - 0.5625) < 1e-14);

    SensorParams z = make(0, 0, 0);
    z.kappa = 0.0;
    CHECK(build_generator(z).norm() == 0.0);

    SensorParams bad = make(1, 0.2, 1);  // eta1 = 0.4 - 1 < 0
    CHECK_THROWS_AS(build_generator(bad), PhysicalityError);
}

TEST_CASE("eigensystem examples") {
    auto e = eigensystem(build_generator(make(1, 1, 1)));
    CHECK(std::abs(e.lambda_plus) < 1e-12);
    CHECK(std::abs(e.lambda_minus) < 1e-12);

    e = eigensystem(build_generator(make(std::sqrt(2.0), 1, 1)));
    CHECK(std::abs(e.lambda_plus - cd(1, 0)) < 1e-12);
    CHECK(std::abs(e.lambda_minus - cd(-1, 0)) < 1e-12);

    SensorParams p = make(0, 0.7, 0.7);
    e = eigensystem(build_generator(p));
    CHECK(std::abs(std::abs(e.lambda_plus.imag()) - 0.7) < 1e-12);
    CHECK(std::abs(e.lambda_plus + e.lambda_minus) < 1e-12);
}

TEST_CASE("eigenvectors satisfy H e = lambda e") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int i = 0; i < 200; ++i) {
        const Mat2c h = build_generator(make(u(rng), u(rng), u(rng)));
        const auto e = eigensystem(h);
        const double scale = std::max(1.0, e.e_plus.norm());
        CHECK((h * e.e_plus - e.lambda_plus * e.e_plus).norm() < 1e-10 * scale);
        CHECK((h * e.e_minus - e.lambda_minus * e.e_minus).norm() < 1e-10 * std::max(1.0, e.e_minus.norm()));
    }
}

TEST_CASE("classify the regime table") {
    auto r = classify(make(1, 1, 1));  // LT-1a
    CHECK(r.is_singular);
    CHECK(r.is_pt_symmetric);
    CHECK(r.is_ep);
    CHECK(r.is_balanced);
    CHECK(r.at_lasing_threshold);
    CHECK(r.det_m < 1e-12);

    r = classify(make(2, 1, 4));  // UN-a
    CHECK(r.det_m < 1e-12);
    CHECK_FALSE(r.is_balanced);
    CHECK_FALSE(r.is_ep);
    CHECK_FALSE(r.is_stable);

    r = classify(make(std::sqrt(2.0), 1, 1));  // LT-2b
    CHECK(r.det_m > 1e-3);
    CHECK(r.is_pt_symmetric);
    CHECK(r.is_balanced);

    r = classify(make(std::sqrt(2.0), 1, 1, 1.0, 0.0));  // LT-2a: omega = 0, omega0 = gamma
    CHECK(r.det_m < 1e-10);
}

TEST_CASE("lasing threshold") {
    CHECK(lasing_threshold(make(1, 1, 0)) == doctest::Approx(1.0));
    CHECK(lasing_threshold(make(2, 1, 0)) == doctest::Approx(1.0));
    CHECK(lasing_threshold(make(0.5, 1, 0)) == doctest::Approx(0.25));
}

TEST_CASE("steady state occupations") {
    auto s = steady_state_occupations(make(1, 1, 0.25));
    CHECK(s.status == SteadyStateStatus::Stable);
    CHECK(std::abs(s.n1 - 4.0 / 9.0) < 1e-12);
    CHECK(std::abs(s.n2 - 16.0 / 9.0) < 1e-12);

    s = steady_state_occupations(make(1, 2, 0));
    CHECK(s.n1 == doctest::Approx(0.0));
    CHECK(s.n2 == doctest::Approx(0.5));

    s = steady_state_occupations(make(1, 1, 1 - 1e-7));
    CHECK(s.status == SteadyStateStatus::Stable);
    CHECK(s.n1 > 1e6);
    CHECK(s.n2 > 1e6);

    CHECK(steady_state_occupations(make(1, 1, 1)).status == SteadyStateStatus::AtThreshold);
    CHECK(steady_state_occupations(make(1, 1, 1.5)).status == SteadyStateStatus::Unstable);
}

TEST_CASE("stability matches the lasing threshold") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int i = 0; i < 500; ++i) {
        const SensorParams p = make(u(rng), u(rng), u(rng));
        const double lt = lasing_threshold(p);
        if (std::abs(p.gamma2 - lt) < 1e-6) continue;
        const auto s = steady_state_occupations(p);
        CHECK((s.status == SteadyStateStatus::Stable) == (p.gamma2 < lt));
        if (s.status == SteadyStateStatus::Stable) {
            CHECK(s.n1 >= 0.0);
            CHECK(s.n2 >= 0.0);
        }
    }
}

TEST_CASE("singular detunings") {
    const SensorParams bal = make(std::sqrt(2.0), 1, 1);
    const auto d = singular_detunings(bal);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(-1.0));
    CHECK(d[1] == doctest::Approx(1.0));
    const Mat4 h = phase_space_rep(build_generator(bal));
    for (double lam : d) CHECK(std::abs((lam * Mat4::Identity() - h).determinant()) < 1e-10);

    const auto ep = singular_detunings(make(1, 1, 1));
    REQUIRE(ep.size() == 1);
    CHECK(std::abs(ep[0]) < 1e-9);

    CHECK(singular_detunings(make(1, 1, 0.5)).empty());
}

TEST_CASE("perturbations") {
    CHECK(perturbation("two_mode_symmetric").matrix.isApprox(Mat2c::Identity()));
    Mat2c s;
    s << cd(0, -1), 1, 1, cd(0, 1);
    CHECK(perturbation("nuisance_S").matrix.isApprox(s));
    Mat2c nr;
    nr << 0, 1, 0, 0;
    CHECK(perturbation("nonreciprocal").matrix.isApprox(nr));
    CHECK(perturbation_names().size() == 7);
    CHECK_THROWS_AS(perturbation("bogus"), std::invalid_argument);
}

TEST_CASE("perturbed generator") {
    const SensorParams p = make(1, 1, 0.5);
    const Mat4 h = phase_space_rep(build_generator(p));
    CHECK(perturbed_generator(p, {}, {}).isApprox(-h));
    const auto id = perturbation("two_mode_symmetric");
    CHECK(perturbed_generator(p, {id}, {0.3}).isApprox(0.3 * Mat4::Identity() - h));
    SensorParams det = make(1, 1, 0.5, 0.0, 0.7);
    CHECK(perturbed_generator(det, {}, {}).isApprox(0.7 * Mat4::Identity() - h));
    CHECK_THROWS_AS(perturbed_generator(p, {id}, {0.1, 0.2}), std::invalid_argument);
    CHECK(ep_generator_phase_space().isApprox(phase_space_rep(build_generator(make(1, 1, 1)))));
}
