#include "phstab/bv_density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "phstab/quadrature.hpp"

namespace phstab {

namespace {
constexpr int kMaxPieceDegree = 8;
constexpr double kVarRelTol = 1e-10;

double lambda_min(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double lambda_max(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

// Golden-section refinement of a scalar extremum bracketed by [lo, hi].
double refine_extremum(const std::function<double(double)>& f, double lo, double hi,
                       bool maximize) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
        const bool keep_left = maximize ? (f1 > f2) : (f1 < f2);
        if (keep_left) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    const double best = maximize ? std::max(f1, f2) : std::min(f1, f2);
    return best;
}

}  // namespace

MatrixPoly::MatrixPoly(std::vector<Eigen::MatrixXd> c) : coeffs(std::move(c)) {
    if (coeffs.empty()) throw std::invalid_argument("MatrixPoly: no coefficients");
    if (static_cast<int>(coeffs.size()) - 1 > kMaxPieceDegree)
        throw std::invalid_argument("MatrixPoly: degree exceeds cap of 8");
    const auto rows = coeffs.front().rows();
    for (const auto& ci : coeffs)
        if (ci.rows() != rows || ci.cols() != rows)
            throw std::invalid_argument("MatrixPoly: coefficient shape mismatch");
}

MatrixPoly MatrixPoly::constant(const Eigen::MatrixXd& c) { return MatrixPoly({c}); }

Eigen::MatrixXd MatrixPoly::value(double zeta) const {
    Eigen::MatrixXd v = coeffs.back();
    for (int d = static_cast<int>(coeffs.size()) - 2; d >= 0; --d) v = v * zeta + coeffs[d];
    return v;
}

Eigen::MatrixXd MatrixPoly::derivative(double zeta) const {
    const int n = static_cast<int>(coeffs.size());
    if (n == 1) return Eigen::MatrixXd::Zero(coeffs[0].rows(), coeffs[0].cols());
    Eigen::MatrixXd v = (n - 1) * coeffs.back();
    for (int d = n - 2; d >= 1; --d) v = v * zeta + d * coeffs[d];
    return v;
}

Eigen::MatrixXd MatrixPoly::integral(double lo, double hi) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(coeffs[0].rows(), coeffs[0].cols());
    double plo = lo, phi_ = hi;
    for (size_t d = 0; d < coeffs.size(); ++d) {
        s += coeffs[d] * ((phi_ - plo) / (d + 1.0));
        plo *= lo;
        phi_ *= hi;
    }
    return s;
}

PiecewiseMatrixDensity::PiecewiseMatrixDensity(std::vector<double> breakpoints,
                                               std::vector<MatrixPoly> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (breakpoints_.size() < 2 || pieces_.size() + 1 != breakpoints_.size())
        throw std::invalid_argument("PiecewiseMatrixDensity: breakpoint/piece count mismatch");
    for (size_t i = 1; i < breakpoints_.size(); ++i)
        if (!(breakpoints_[i - 1] < breakpoints_[i]))
            throw std::invalid_argument("PiecewiseMatrixDensity: breakpoints not increasing");
    const int m = pieces_.front().dim();
    for (const auto& p : pieces_)
        if (p.dim() != m)
            throw std::invalid_argument("PiecewiseMatrixDensity: piece dimension mismatch");
}

PiecewiseMatrixDensity PiecewiseMatrixDensity::constant(double a, double b,
                                                        const Eigen::MatrixXd& value) {
    return PiecewiseMatrixDensity({a, b}, {MatrixPoly::constant(value)});
}

PiecewiseMatrixDensity PiecewiseMatrixDensity::scalar_step(double a, double b, double where,
                                                           double before, double after) {
    Eigen::MatrixXd v1(1, 1), v2(1, 1);
    v1 << before;
    v2 << after;
    return PiecewiseMatrixDensity({a, where, b},
                                  {MatrixPoly::constant(v1), MatrixPoly::constant(v2)});
}

int PiecewiseMatrixDensity::piece_index(double zeta, Side side) const {
    if (zeta < a() || zeta > b())
        throw std::domain_error("PiecewiseMatrixDensity: point outside [a, b]");
    if (zeta == a() && side == Side::Left)
        throw std::domain_error("PiecewiseMatrixDensity: no left limit at a");
    if (zeta == b() && side == Side::Right)
        throw std::domain_error("PiecewiseMatrixDensity: no right limit at b");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), zeta);
    int idx = static_cast<int>(it - breakpoints_.begin()) - 1;
    idx = std::min(idx, static_cast<int>(pieces_.size()) - 1);
    // Exactly at a breakpoint: the left limit lives in the previous piece.
    if (side == Side::Left && zeta == breakpoints_[idx]) --idx;
    return idx;
}

Eigen::MatrixXd PiecewiseMatrixDensity::evaluate(double zeta, Side side) const {
    return pieces_[piece_index(zeta, side)].value(zeta);
}

Eigen::MatrixXd PiecewiseMatrixDensity::derivative(double zeta, Side side) const {
    return pieces_[piece_index(zeta, side)].derivative(zeta);
}

double PiecewiseMatrixDensity::total_variation() const {
    double var = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        if (p.degree() == 0) continue;
        var += integrate_adaptive([&](double z) { return op_norm(p.derivative(z)); },
                                  breakpoints_[i], breakpoints_[i + 1], kVarRelTol);
    }
    for (size_t i = 1; i + 1 < breakpoints_.size(); ++i) {
        const double z = breakpoints_[i];
        var += op_norm(pieces_[i].value(z) - pieces_[i - 1].value(z));
    }
    return var;
}

std::pair<double, double> PiecewiseMatrixDensity::eigen_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const auto& p = pieces_[i];
        const double zl = breakpoints_[i], zr = breakpoints_[i + 1];
        const int grid = std::max(65, 16 * (p.degree() + 1));
        std::vector<double> fmin(grid), fmax(grid), zs(grid);
        for (int g = 0; g < grid; ++g) {
            zs[g] = zl + (zr - zl) * g / (grid - 1.0);
            const Eigen::MatrixXd v = p.value(zs[g]);
            fmin[g] = lambda_min(v);
            fmax[g] = lambda_max(v);
            lo = std::min(lo, fmin[g]);
            hi = std::max(hi, fmax[g]);
        }
        if (p.degree() == 0) continue;
        auto flo = [&](double z) { return lambda_min(p.value(z)); };
        auto fhi = [&](double z) { return lambda_max(p.value(z)); };
        for (int g = 1; g + 1 < grid; ++g) {
            if (fmin[g] <= fmin[g - 1] && fmin[g] <= fmin[g + 1])
                lo = std::min(lo, refine_extremum(flo, zs[g - 1], zs[g + 1], false));
            if (fmax[g] >= fmax[g - 1] && fmax[g] >= fmax[g + 1])
                hi = std::max(hi, refine_extremum(fhi, zs[g - 1], zs[g + 1], true));
        }
    }
    return {lo, hi};
}

std::pair<double, double> PiecewiseMatrixDensity::bounds() const {
    auto [lo, hi] = eigen_range();
    if (!(lo > 0.0)) throw std::domain_error("not an energy density: lower eigenvalue bound <= 0");
    return {lo, hi};
}

double PiecewiseMatrixDensity::mbar_prime() const {
    return op_norm(evaluate(a(), Side::Right)) + total_variation() +
           op_norm(evaluate(b(), Side::Left));
}

Eigen::MatrixXd PiecewiseMatrixDensity::cell_average(double lo, double hi) const {
    if (!(lo < hi)) throw std::domain_error("cell_average: degenerate cell");
    if (lo < a() || hi > b()) throw std::domain_error("cell_average: cell outside [a, b]");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim(), dim());
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double l = std::max(lo, breakpoints_[i]);
        const double h = std::min(hi, breakpoints_[i + 1]);
        if (l < h) s += pieces_[i].integral(l, h);
    }
    return s / (hi - lo);
}

// --- mollification -----------------------------------------------------------

double bump(double r) {
    const double q = 1.0 - r * r;
    if (q <= 0.0) return 0.0;
    return bump_normalization() * std::exp(-1.0 / q);
}

double bump_derivative(double r) {
    const double q = 1.0 - r * r;
    if (q <= 0.0) return 0.0;
    return bump_normalization() * std::exp(-1.0 / q) * (-2.0 * r / (q * q));
}

double bump_normalization() {
    static const double c = [] {
        const double integral = integrate_adaptive(
            [](double r) {
                const double q = 1.0 - r * r;
                return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
            },
            -1.0, 1.0, 1e-13);
        return 1.0 / integral;
    }();
    return c;
}

namespace {

// Clamped extension of the density by its one-sided boundary values.
Eigen::MatrixXd clamped_eval(const PiecewiseMatrixDensity& d, double s) {
    if (s <= d.a()) return d.evaluate(d.a(), Side::Right);
    if (s >= d.b()) return d.evaluate(d.b(), Side::Left);
    return d.evaluate(s, Side::Right);
}

// Integrates u -> weight(u) * Htilde(zeta - eps*u) over [-1, 1], splitting at
// the preimages of the breakpoints so every segment has a smooth integrand.
// Returns the convolution together with the quadrature mass of the bare
// weight over the same segmentation, so callers can cancel the (analytically
// known) mass against its numerical value: this keeps mollified values exact
// convex combinations of source values and gives constants an exactly zero
// derivative.
std::pair<Eigen::MatrixXd, double> convolve(const PiecewiseMatrixDensity& d, double zeta,
                                            double eps,
                                            const std::function<double(double)>& weight) {
    std::vector<double> cuts{-1.0, 1.0};
    for (double beta : d.breakpoints()) {
        const double u = (zeta - beta) / eps;
        if (u > -1.0 && u < 1.0) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d.dim(), d.dim());
    double mass = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        s += integrate_gl_matrix(
            [&](double u) -> Eigen::MatrixXd { return weight(u) * clamped_eval(d, zeta - eps * u); },
            cuts[i], cuts[i + 1], 48);
        mass += integrate_gl(weight, cuts[i], cuts[i + 1], 48);
    }
    return {std::move(s), mass};
}

}  // namespace

SmoothDensity::SmoothDensity(PiecewiseMatrixDensity source, double eps, int num_samples,
                             bool parallel)
    : source_(std::move(source)), eps_(eps) {
    if (!(eps > 0.0)) throw std::domain_error("mollify: eps must be positive");
    if (num_samples < 9) throw std::invalid_argument("mollify: too few samples");
    sample_points_.resize(num_samples);
    values_.resize(num_samples);
    derivs_.resize(num_samples);
    const double a0 = source_.a(), b0 = source_.b();
    for (int i = 0; i < num_samples; ++i)
        sample_points_[i] = a0 + (b0 - a0) * i / (num_samples - 1.0);

#pragma omp parallel for schedule(dynamic, 16) if (parallel)
    for (int i = 0; i < num_samples; ++i) {
        values_[i] = value_exact(sample_points_[i]);
        derivs_[i] = derivative_exact(sample_points_[i]);
    }
}

Eigen::MatrixXd SmoothDensity::value_exact(double zeta) const {
    auto [s, mass] = convolve(source_, zeta, eps_, [](double u) { return bump(u); });
    return s / mass;  // exact unit mass
}

Eigen::MatrixXd SmoothDensity::derivative_exact(double zeta) const {
    auto [s, mass] =
        convolve(source_, zeta, eps_, [](double u) { return bump_derivative(u); });
    return (s - mass * clamped_eval(source_, zeta)) / eps_;  // exact zero mass
}

Eigen::MatrixXd SmoothDensity::value(double zeta) const {
    if (zeta < a() || zeta > b()) throw std::domain_error("SmoothDensity: point outside [a, b]");
    const int n = num_samples();
    const double h = (b() - a()) / (n - 1.0);
    int i = std::min(static_cast<int>((zeta - a()) / h), n - 2);
    const double t = (zeta - sample_points_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * values_[i] + h10 * h * derivs_[i] + h01 * values_[i + 1] +
           h11 * h * derivs_[i + 1];
}

Eigen::MatrixXd SmoothDensity::derivative(double zeta) const {
    if (zeta < a() || zeta > b()) throw std::domain_error("SmoothDensity: point outside [a, b]");
    const int n = num_samples();
    const double h = (b() - a()) / (n - 1.0);
    int i = std::min(static_cast<int>((zeta - a()) / h), n - 2);
    const double t = (zeta - sample_points_[i]) / h;
    const double d00 = 6 * t * (t - 1) / h;
    const double d10 = (1 - t) * (1 - 3 * t);
    const double d01 = -6 * t * (t - 1) / h;
    const double d11 = t * (3 * t - 2);
    return d00 * values_[i] + d10 * derivs_[i] + d01 * values_[i + 1] + d11 * derivs_[i + 1];
}

double SmoothDensity::total_variation() const {
    // Split at breakpoint +- eps so each segment of the integrand is smooth.
    std::vector<double> cuts{a(), b()};
    for (double beta : source_.breakpoints())
        for (double s : {beta - eps_, beta + eps_})
            if (s > a() && s < b()) cuts.push_back(s);
    std::sort(cuts.begin(), cuts.end());
    // Tail segments carry pure convolution noise; cut refinement off at a
    // fixed fraction of the source variation instead of chasing it.
    const double floor = 1e-12 * (1.0 + source_.total_variation());
    double var = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-14) continue;
        var += integrate_adaptive([&](double z) { return op_norm(derivative_exact(z)); }, cuts[i],
                                  cuts[i + 1], 1e-9, floor);
    }
    return var;
}

std::pair<double, double> SmoothDensity::bounds_at_samples() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& v : values_) {
        lo = std::min(lo, lambda_min(v));
        hi = std::max(hi, lambda_max(v));
    }
    return {lo, hi};
}

SmoothDensity mollify(const PiecewiseMatrixDensity& density, double eps, int num_samples) {
    return SmoothDensity(density, eps, num_samples, true);
}

SmoothDensity mollify_serial(const PiecewiseMatrixDensity& density, double eps, int num_samples) {
    return SmoothDensity(density, eps, num_samples, false);
}

PiecewiseMatrixDensity to_piecewise(const SmoothDensity& smooth) {
    const auto& z = smooth.sample_points();
    const auto& V = smooth.sample_values();
    const auto& D = smooth.sample_derivatives();
    std::vector<MatrixPoly> pieces;
    pieces.reserve(z.size() - 1);
    for (size_t i = 0; i + 1 < z.size(); ++i) {
        const double h = z[i + 1] - z[i];
        const Eigen::MatrixXd dV = V[i + 1] - V[i];
        // Hermite cubic in s = zeta - z_i, then shifted to the global variable.
        const Eigen::MatrixXd c0 = V[i];
        const Eigen::MatrixXd c1 = D[i];
        const Eigen::MatrixXd c2 = 3.0 * dV / (h * h) - (2.0 * D[i] + D[i + 1]) / h;
        const Eigen::MatrixXd c3 = -2.0 * dV / (h * h * h) + (D[i] + D[i + 1]) / (h * h);
        const double s = z[i];
        pieces.emplace_back(std::vector<Eigen::MatrixXd>{
            c0 - c1 * s + c2 * (s * s) - c3 * (s * s * s),
            c1 - 2.0 * c2 * s + 3.0 * c3 * (s * s), c2 - 3.0 * c3 * s, c3});
    }
    return PiecewiseMatrixDensity(z, std::move(pieces));
}

}  // namespace phstab
