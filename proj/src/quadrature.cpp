#include "phstab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace phstab {

namespace {

// Legendre roots by Newton iteration on P_n, seeded with the Chebyshev estimate.
std::pair<std::vector<double>, std::vector<double>> compute_gl(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    return {x, w};
}

}  // namespace

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gl(order)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double lo, double hi, int order) {
    const auto& [x, w] = gauss_legendre(order);
    const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += w[i] * f(m + c * x[i]);
    return c * s;
}

Eigen::MatrixXd integrate_gl_matrix(const std::function<Eigen::MatrixXd(double)>& f, double lo,
                                    double hi, int order) {
    const auto& [x, w] = gauss_legendre(order);
    const double c = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
    Eigen::MatrixXd s = w[0] * f(m + c * x[0]);
    for (int i = 1; i < order; ++i) s += w[i] * f(m + c * x[i]);
    return c * s;
}

namespace {

double adapt_rec(const std::function<double(double)>& f, double lo, double hi, double coarse,
                 double tol, double abs_floor, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double left = integrate_gl(f, lo, mid, 15);
    const double right = integrate_gl(f, mid, hi, 15);
    const double fine = left + right;
    if (depth <= 0 || std::abs(fine - coarse) <= std::max(tol, abs_floor)) return fine;
    return adapt_rec(f, lo, mid, left, 0.5 * tol, abs_floor, depth - 1) +
           adapt_rec(f, mid, hi, right, 0.5 * tol, abs_floor, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol, double abs_floor, int max_depth) {
    if (!(lo <= hi)) throw std::domain_error("integrate_adaptive: empty interval");
    if (lo == hi) return 0.0;
    const double coarse = integrate_gl(f, lo, hi, 15);
    const double scale = std::max(std::abs(coarse), 1e-30);
    return adapt_rec(f, lo, hi, coarse, rel_tol * scale, abs_floor, max_depth);
}

double op_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

}  // namespace phstab
