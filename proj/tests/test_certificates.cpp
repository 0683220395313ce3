#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phstab/certificates.hpp"

using namespace phstab;

namespace {

Eigen::MatrixXd scalar(double v) {
    Eigen::MatrixXd M(1, 1);
    M << v;
    return M;
}

PiecewiseMatrixDensity one() {
    return PiecewiseMatrixDensity::constant(0.0, 1.0, scalar(1.0));
}

PortHamiltonianSystem uniform_string() { return string_model(one(), one()); }

PortHamiltonianSystem bv_string(double rho_right) {
    auto rho = PiecewiseMatrixDensity::scalar_step(0.0, 1.0, 0.5, 1.0, rho_right);
    return string_model(rho, one());
}

}  // namespace

TEST_CASE("certificate chain for the uniform string at matched gain") {
    const auto c = decay_certificate(uniform_string(), 1.0);
    // independent re-evaluation from first principles: m = mbar = 1,
    // |P1^{-1}| = 1, P0 = 0, Var(H) = 0, length 1
    const double gamma0 = 1.0;
    const double kappa0 = (2.0 * 0.0 * 1.0 + (1.0 + 0.0 + 1.0)) / 1.0;
    const double t0 = 2.0 * gamma0 * 1.0 + 1.0;
    const double C0 = std::exp(kappa0 * 1.0) * 1.0 / 2.0;
    const double kappa = 0.5 * std::min(0.5, 0.5);
    const double q = C0 / (2.0 * kappa);
    const double mu0 = std::sqrt(q / (1.0 + q));
    const double M0 = 1.0 / mu0;
    const double omega0 = std::log(mu0) / t0;

    CHECK(c.gamma0 == doctest::Approx(gamma0).epsilon(1e-12));
    CHECK(c.kappa0 == doctest::Approx(kappa0).epsilon(1e-12));
    CHECK(c.t0 == doctest::Approx(t0).epsilon(1e-12));
    CHECK(c.C0 == doctest::Approx(C0).epsilon(1e-12));
    CHECK(c.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.kappa == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(c.mu0 == doctest::Approx(mu0).epsilon(1e-12));
    CHECK(c.M0 == doctest::Approx(M0).epsilon(1e-12));
    CHECK(c.omega0 == doctest::Approx(omega0).epsilon(1e-12));
    // spot values
    CHECK(c.C0 == doctest::Approx(std::exp(2.0) / 2.0).epsilon(1e-12));
    CHECK(c.mu0 == doctest::Approx(0.93850789979513878).epsilon(1e-10));
    CHECK(c.omega0 == doctest::Approx(-0.021154668507162109).epsilon(1e-10));
    CHECK(c.endpoint == 'b');
    CHECK_FALSE(c.sharpened);
    CHECK(certificate_residual(c) <= 1e-14);
}

TEST_CASE("certified rate is best at the matched gain") {
    const auto sys = uniform_string();
    const double best = decay_certificate(sys, 1.0).omega0;
    for (double mu : {0.25, 0.5, 0.9, 1.1, 2.0, 4.0}) {
        CHECK(decay_certificate(sys, mu).omega0 > best);
    }
}

TEST_CASE("gain symmetry mu <-> 1/mu") {
    const auto sys = uniform_string();
    for (double mu : {0.25, 0.5, 2.0}) {
        const double w1 = decay_certificate(sys, mu).omega0;
        const double w2 = decay_certificate(sys, 1.0 / mu).omega0;
        CHECK(w1 == doctest::Approx(w2).epsilon(1e-12));
    }
}

TEST_CASE("larger density jumps weaken the certified rate") {
    const double w2 = decay_certificate(bv_string(2.0), 1.0).omega0;
    const double w4 = decay_certificate(bv_string(4.0), 1.0).omega0;
    const double w9 = decay_certificate(bv_string(9.0), 1.0).omega0;
    const double w1 = decay_certificate(uniform_string(), 1.0).omega0;
    CHECK(w1 < w2);
    CHECK(w2 < w4);
    CHECK(w4 < w9);
    CHECK(w9 < 0.0);
}

TEST_CASE("hypothesis failures are reported, not certified") {
    auto broken = uniform_string();
    broken.WC = -broken.WC;  // destroys passivity
    CHECK_THROWS_AS(decay_certificate(broken, 1.0), HypothesisError);

    auto blind = uniform_string();
    blind.WC.setZero();  // trace domination fails: output sees nothing
    CHECK_THROWS_AS(decay_certificate(blind, 1.0), HypothesisError);

    CHECK_THROWS_AS(decay_certificate(uniform_string(), -1.0), std::domain_error);
}

TEST_CASE("sharpened certificate never certifies a slower rate") {
    const auto sys = bv_string(4.0);
    for (double mu : {0.5, 1.0, 2.0}) {
        const auto plain = decay_certificate(sys, mu);
        const auto sharp = sharpened_certificate(sys, mu);
        CHECK(sharp.sharpened);
        CHECK(sharp.kappa >= plain.kappa - 1e-9);
        CHECK(sharp.omega0 <= plain.omega0 + 1e-9);
        CHECK(certificate_residual(sharp) <= 1e-14);
    }
}

TEST_CASE("energy envelope decays from M0^2 E0") {
    const auto c = decay_certificate(uniform_string(), 1.0);
    const double E0 = 2.0;
    CHECK(energy_envelope(c, E0, 0.0) == doctest::Approx(c.M0 * c.M0 * E0));
    CHECK(energy_envelope(c, E0, 10.0) < energy_envelope(c, E0, 5.0));
    CHECK(energy_envelope(c, E0, 5.0) < energy_envelope(c, E0, 0.0));
    CHECK_THROWS_AS(energy_envelope(c, E0, -1.0), std::domain_error);
    CHECK_THROWS_AS(energy_envelope(c, -1.0, 1.0), std::domain_error);
}

TEST_CASE("tampered certificates have nonzero residual") {
    auto c = decay_certificate(uniform_string(), 1.0);
    c.omega0 *= 1.5;
    CHECK(certificate_residual(c) > 1e-3);
}
