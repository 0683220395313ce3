#include "phstab/phs_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "phstab/quadrature.hpp"

namespace phstab {

namespace {

int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-10) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

// Diagonal matrix density assembled from scalar piecewise densities, with
// breakpoints merged. Entries flagged in `reciprocal` are inverted, which
// requires the corresponding scalar to be piecewise constant.
PiecewiseMatrixDensity diag_density(const std::vector<const PiecewiseMatrixDensity*>& entries,
                                    const std::vector<bool>& reciprocal) {
    const int m = static_cast<int>(entries.size());
    std::set<double> bps;
    for (const auto* e : entries) {
        if (e->dim() != 1) throw std::invalid_argument("diag_density: entries must be scalar");
        bps.insert(e->breakpoints().begin(), e->breakpoints().end());
    }
    std::vector<double> breakpoints(bps.begin(), bps.end());
    for (const auto* e : entries)
        if (e->a() != breakpoints.front() || e->b() != breakpoints.back())
            throw std::invalid_argument("diag_density: interval mismatch between coefficients");

    std::vector<MatrixPoly> pieces;
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
        int max_deg = 0;
        std::vector<MatrixPoly> entry_polys;
        for (int e = 0; e < m; ++e) {
            const auto& scalar = *entries[e];
            const auto& sb = scalar.breakpoints();
            auto it = std::upper_bound(sb.begin(), sb.end(), mid);
            const size_t idx =
                std::min<size_t>(it - sb.begin() - 1, scalar.pieces().size() - 1);
            const auto& piece = scalar.pieces()[idx];
            if (reciprocal[e]) {
                if (piece.degree() != 0)
                    throw std::invalid_argument(
                        "diag_density: reciprocal coefficient must be piecewise constant");
                Eigen::MatrixXd inv(1, 1);
                inv << 1.0 / piece.coeffs[0](0, 0);
                entry_polys.push_back(MatrixPoly::constant(inv));
            } else {
                entry_polys.push_back(piece);
            }
            max_deg = std::max(max_deg, entry_polys.back().degree());
        }
        std::vector<Eigen::MatrixXd> coeffs(max_deg + 1, Eigen::MatrixXd::Zero(m, m));
        for (int e = 0; e < m; ++e)
            for (int d = 0; d <= entry_polys[e].degree(); ++d)
                coeffs[d](e, e) = entry_polys[e].coeffs[d](0, 0);
        pieces.emplace_back(std::move(coeffs));
    }
    return PiecewiseMatrixDensity(std::move(breakpoints), std::move(pieces));
}

}  // namespace

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ValidationReport validate_system(const PortHamiltonianSystem& sys) {
    ValidationReport rep;
    const int m = sys.m, k = sys.k;

    auto add = [&](std::string name, bool ok, double res) {
        rep.checks.push_back({std::move(name), ok, res});
    };

    bool dims_ok = sys.P1.rows() == m && sys.P1.cols() == m && sys.P0.rows() == m &&
                   sys.P0.cols() == m && sys.density.dim() == m && k >= 1 && k <= m &&
                   sys.WB1.rows() == m - k && sys.WB1.cols() == 2 * m && sys.WB2.rows() == k &&
                   sys.WB2.cols() == 2 * m && sys.WC.rows() == k && sys.WC.cols() == 2 * m;
    add("dimensions", dims_ok, 0.0);
    if (!dims_ok) return rep;

    const double sym_res = op_norm(sys.P1 - sys.P1.transpose());
    add("P1 Hermitian", sym_res <= 1e-12 * (1.0 + op_norm(sys.P1)), sym_res);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.P1);
    const double smin = svd.singularValues()(m - 1), smax = svd.singularValues()(0);
    add("P1 invertible", smax > 0.0 && smin >= 1e-12 * smax, smax > 0.0 ? smin / smax : 0.0);

    const double skew_res = op_norm(sys.P0 + sys.P0.transpose());
    add("P0 skew-Hermitian", skew_res <= 1e-12, skew_res);

    double mlo = 0.0;
    bool density_ok = true;
    try {
        mlo = sys.density.bounds().first;
    } catch (const std::domain_error&) {
        density_ok = false;
    }
    add("density positive-definite", density_ok, mlo);

    const int r = numerical_rank(sys.WB1);
    add("WB1 full row rank", r == m - k, static_cast<double>(r));
    return rep;
}

Eigen::MatrixXd boundary_form(const Eigen::MatrixXd& P1) {
    const int m = static_cast<int>(P1.rows());
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    Q.topLeftCorner(m, m) = 0.25 * P1;
    Q.bottomRightCorner(m, m) = -0.25 * P1;
    return 0.5 * (Q + Q.transpose().eval());
}

ClosedLoopSystem close_loop(const PortHamiltonianSystem& sys, double mu) {
    if (!(mu > 0.0)) throw std::domain_error("close_loop: mu must be positive");
    ClosedLoopSystem cl{sys, mu, {}, 0};
    const int m = sys.m, k = sys.k;
    cl.W.resize(m, 2 * m);
    cl.W.topRows(m - k) = sys.WB1;
    cl.W.bottomRows(k) = sys.WB2 + mu * sys.WC;
    cl.rank_W = numerical_rank(cl.W);
    return cl;
}

double energy(const SpatialGrid& grid, const Eigen::VectorXd& f) {
    const int m = grid.m;
    if (f.size() != static_cast<Eigen::Index>(m) * (grid.n + 1))
        throw std::invalid_argument("energy: state size does not match grid");
    double e = 0.0;
    for (int j = 0; j <= grid.n; ++j) {
        const auto fj = f.segment(static_cast<Eigen::Index>(j) * m, m);
        e += grid.weights(j) * fj.dot(grid.Hinv[j] * fj);
    }
    return 0.5 * e;
}

PortHamiltonianSystem string_model(const PiecewiseMatrixDensity& rho,
                                   const PiecewiseMatrixDensity& T) {
    PortHamiltonianSystem sys{
        2, 1, Eigen::MatrixXd(2, 2), Eigen::MatrixXd::Zero(2, 2),
        diag_density({&rho, &T}, {true, false}), {}, {}, {}};
    sys.P1 << 0, 1, 1, 0;
    sys.density.bounds();  // throws for nonpositive coefficients

    // Trace ordering v = (f1(b), f2(b), f1(a), f2(a)), f = (w_t, T w_z).
    const double s = 1.0 / std::sqrt(2.0);
    sys.WB1 = Eigen::MatrixXd::Zero(1, 4);
    sys.WB1(0, 2) = 1.0;  // clamp: w_t(a) = 0
    sys.WB2 = Eigen::MatrixXd::Zero(1, 4);
    sys.WB2(0, 1) = s;    // force at b
    sys.WC = Eigen::MatrixXd::Zero(1, 4);
    sys.WC(0, 0) = s;     // velocity at b
    return sys;
}

PortHamiltonianSystem timoshenko_model(const PiecewiseMatrixDensity& rho,
                                       const PiecewiseMatrixDensity& EI,
                                       const PiecewiseMatrixDensity& Ir,
                                       const PiecewiseMatrixDensity& K) {
    PortHamiltonianSystem sys{
        4, 2, Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4),
        diag_density({&K, &rho, &EI, &Ir}, {false, true, false, true}), {}, {}, {}};
    sys.P1(0, 1) = sys.P1(1, 0) = 1.0;
    sys.P1(2, 3) = sys.P1(3, 2) = 1.0;
    sys.P0(0, 3) = -1.0;
    sys.P0(3, 0) = 1.0;
    sys.density.bounds();

    // f = (K(w_z - phi), w_t, EI phi_z, phi_t); v = (f(b); f(a)).
    const double s = 1.0 / std::sqrt(2.0);
    sys.WB1 = Eigen::MatrixXd::Zero(2, 8);
    sys.WB1(0, 5) = 1.0;  // w_t(a) = 0
    sys.WB1(1, 7) = 1.0;  // phi_t(a) = 0
    sys.WB2 = Eigen::MatrixXd::Zero(2, 8);
    sys.WB2(0, 0) = s;    // force at b
    sys.WB2(1, 2) = s;    // torsional moment at b
    sys.WC = Eigen::MatrixXd::Zero(2, 8);
    sys.WC(0, 1) = s;     // velocity at b
    sys.WC(1, 3) = s;     // angular velocity at b
    return sys;
}

}  // namespace phstab
