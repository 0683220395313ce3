#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phstab/conditions.hpp"

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

// Congruence transform that preserves Herm(WB2^* WC) and ker(WB1): replaces
// the input/output pair by (R u, R^{-T} y) and mixes the homogeneous rows.
PortHamiltonianSystem transformed(const PortHamiltonianSystem& sys, std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    auto random_invertible = [&](int n) {
        while (true) {
            Eigen::MatrixXd R(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) R(i, j) = c(rng);
            if (std::abs(R.determinant()) > 0.1) return R;
        }
    };
    PortHamiltonianSystem out = sys;
    const Eigen::MatrixXd R = random_invertible(sys.k);
    out.WB2 = R * sys.WB2;
    out.WC = R.inverse().transpose() * sys.WC;
    out.WB1 = random_invertible(sys.m - sys.k) * sys.WB1;
    return out;
}

}  // namespace

TEST_CASE("kernel basis is orthonormal and annihilated") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    Eigen::MatrixXd M(2, 5);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 5; ++j) M(i, j) = c(rng);
    const Eigen::MatrixXd V = kernel_basis(M);
    CHECK(V.cols() == 3);
    CHECK((M * V).norm() < 1e-12);
    CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("rank-deficient constraint matrix is rejected") {
    Eigen::MatrixXd M(2, 4);
    M << 1, 2, 3, 4, 2, 4, 6, 8;
    CHECK_THROWS_AS(kernel_basis(M), std::invalid_argument);
}

TEST_CASE("uniform string is impedance-energy-preserving with lambda = 1/2 at b") {
    auto sys = uniform_string();
    const auto pas = check_impedance_passive(sys);
    CHECK(pas.passive);
    CHECK(pas.preserving);
    CHECK(std::abs(pas.residual) <= 1e-12);

    const auto dom = trace_domination(sys);
    CHECK(dom.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dom.endpoint == 'b');
    CHECK(dom.lambda_a == doctest::Approx(0.0));
}

TEST_CASE("timoshenko beam satisfies both hypotheses") {
    auto sys = timoshenko_model(one(), one(), one(), one());
    const auto pas = check_impedance_passive(sys);
    CHECK(pas.passive);
    CHECK(pas.preserving);
    const auto dom = trace_domination(sys);
    CHECK(dom.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dom.endpoint == 'b');
}

TEST_CASE("flipping the output sign destroys passivity") {
    auto sys = uniform_string();
    sys.WC = -sys.WC;
    const auto pas = check_impedance_passive(sys);
    CHECK_FALSE(pas.passive);
    CHECK(pas.residual < -1e-3);
}

TEST_CASE("closed-loop dissipation constant for the matched string") {
    auto sys = uniform_string();
    const auto d1 = check_dissipative(close_loop(sys, 1.0));
    CHECK(d1.dissipative);
    CHECK(d1.kappa_best == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(d1.endpoint == 'b');

    const auto d2 = check_dissipative(close_loop(sys, 2.0));
    CHECK(d2.dissipative);
    // analytic chain guarantees lambda min(1/(2mu), mu/2) = 1/8; the direct
    // optimum cannot be smaller
    CHECK(d2.kappa_best >= 0.125 - 1e-10);
}

TEST_CASE("conservative loop has zero dissipation constant") {
    auto sys = uniform_string();
    sys.WC.setZero();  // u = -mu y becomes the homogeneous condition u = 0
    const auto d = check_dissipative(close_loop(sys, 1.0));
    CHECK(d.kappa_best == doctest::Approx(0.0));
    CHECK_FALSE(d.dissipative);
}

TEST_CASE("random congruence transforms keep the hypotheses intact") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        auto base = (trial % 2 == 0) ? uniform_string()
                                     : timoshenko_model(one(), one(), one(), one());
        auto sys = transformed(base, rng);
        const auto pas = check_impedance_passive(sys);
        CHECK(pas.passive);
        CHECK(pas.preserving);
        const auto dom = trace_domination(sys);
        CHECK(dom.lambda > 0.0);
        CHECK(dom.endpoint == 'b');
        // hypotheses (i) + (ii) imply strict dissipativity of every closed loop
        for (double mu : {0.5, 1.0, 3.0}) {
            const auto dis = check_dissipative(close_loop(sys, mu));
            CHECK(dis.dissipative);
            CHECK(dis.kappa_best >=
                  dom.lambda * std::min(1.0 / (2.0 * mu), mu / 2.0) - 1e-8);
        }
    }
}

TEST_CASE("condition report aggregates the individual checks") {
    const auto rep = run_condition_checks(uniform_string(), 1.0);
    CHECK(rep.hypotheses_hold());
    CHECK(rep.impedance_preserving);
    CHECK(rep.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.closed_loop_dissipative);
    CHECK(rep.kappa_best == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(rep.rank_full);
    CHECK(rep.mu == 1.0);
}

TEST_CASE("trace selector picks the right block") {
    const Eigen::MatrixXd Tb = trace_selector(2, 'b');
    const Eigen::MatrixXd Ta = trace_selector(2, 'a');
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    CHECK((Tb * v - (Eigen::VectorXd(2) << 1, 2).finished()).norm() == 0.0);
    CHECK((Ta * v - (Eigen::VectorXd(2) << 3, 4).finished()).norm() == 0.0);
}
