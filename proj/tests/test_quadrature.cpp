#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phstab/quadrature.hpp"

using namespace phstab;

TEST_CASE("gauss-legendre weights sum to interval length") {
    for (int order : {2, 5, 15, 48}) {
        const auto& [x, w] = gauss_legendre(order);
        double s = 0.0;
        for (double wi : w) s += wi;
        CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
        for (size_t i = 1; i < x.size(); ++i) CHECK(x[i] > x[i - 1]);
    }
}

TEST_CASE("order-n rule is exact through degree 2n-1") {
    // integral of x^9 - 3 x^4 over [0, 2] = 2^10/10 - 3 * 2^5/5
    const double exact = 1024.0 / 10.0 - 96.0 / 5.0;
    const double got =
        integrate_gl([](double x) { return std::pow(x, 9) - 3.0 * std::pow(x, 4); }, 0.0, 2.0, 5);
    CHECK(got == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("transcendental integrand against closed form") {
    const double got = integrate_gl([](double x) { return std::cos(x); }, 0.0, 1.3, 15);
    CHECK(got == doctest::Approx(std::sin(1.3)).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature resolves a kink") {
    // integral of |x - 0.3| over [0, 1] = (0.09 + 0.49) / 2
    const double got =
        integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12);
    CHECK(got == doctest::Approx(0.29).epsilon(1e-11));
}

TEST_CASE("adaptive quadrature with absolute floor ignores rounding noise") {
    long evals = 0;
    const double got = integrate_adaptive(
        [&](double x) {
            ++evals;
            return 1e-16 * std::sin(1000.0 * x);
        },
        0.0, 1.0, 1e-12, 1e-12);
    CHECK(std::abs(got) < 1e-12);
    CHECK(evals < 10000);
}

TEST_CASE("matrix quadrature matches entrywise scalar quadrature") {
    auto f = [](double x) {
        Eigen::MatrixXd M(2, 2);
        M << x, x * x, std::exp(x), 1.0;
        return M;
    };
    const Eigen::MatrixXd got = integrate_gl_matrix(f, 0.0, 1.0, 20);
    CHECK(got(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(got(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(got(1, 0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    CHECK(got(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("operator norm") {
    Eigen::MatrixXd M(2, 2);
    M << 3.0, 0.0, 0.0, -4.0;
    CHECK(op_norm(M) == doctest::Approx(4.0).epsilon(1e-14));
    Eigen::MatrixXd one(1, 1);
    one << -2.5;
    CHECK(op_norm(one) == doctest::Approx(2.5));
    // rank-1 uv^T has norm |u| |v|
    Eigen::VectorXd u(3), v(3);
    u << 1, 2, 2;
    v << 0, 3, 4;
    CHECK(op_norm(u * v.transpose()) == doctest::Approx(15.0).epsilon(1e-13));
}
