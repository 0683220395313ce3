#include "phstab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "phstab/quadrature.hpp"

namespace phstab {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& trips, int row_block, int col_block, int m,
               const Eigen::MatrixXd& blk) {
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            if (blk(r, c) != 0.0) trips.emplace_back(row_block * m + r, col_block * m + c, blk(r, c));
}

// Trapezoid integral of uniformly sampled g over [r, t], with linear
// interpolation at the fractional endpoints.
double integrate_window(const std::vector<double>& g, double ds, double r, double t) {
    if (t <= r) return 0.0;
    auto value_at = [&](double s) {
        const double p = s / ds;
        const int i = std::min(static_cast<int>(p), static_cast<int>(g.size()) - 2);
        const double w = p - i;
        return (1.0 - w) * g[i] + w * g[i + 1];
    };
    const int i_lo = static_cast<int>(std::ceil(r / ds - 1e-12));
    const int i_hi = static_cast<int>(std::floor(t / ds + 1e-12));
    if (i_lo > i_hi) {
        // window inside a single sample interval
        return 0.5 * (value_at(r) + value_at(t)) * (t - r);
    }
    double sum = 0.0;
    for (int i = i_lo; i < i_hi; ++i) sum += 0.5 * (g[i] + g[i + 1]) * ds;
    const double s_lo = i_lo * ds, s_hi = i_hi * ds;
    if (s_lo > r) sum += 0.5 * (value_at(r) + g[i_lo]) * (s_lo - r);
    if (t > s_hi) sum += 0.5 * (g[i_hi] + value_at(t)) * (t - s_hi);
    return sum;
}

Eigen::MatrixXd pointwise_density(const DiscreteGenerator& gen, int j) {
    const auto& d = gen.system.base.density;
    const double z = gen.grid.nodes[j];
    return d.evaluate(z, j == gen.grid.n ? Side::Left : Side::Right);
}

std::vector<double> sideways_energy_impl(const DiscreteGenerator& gen, const Trajectory& traj,
                                         double gamma0, double tau, int sign, bool parallel) {
    if (traj.store_every != 1 || traj.states.empty())
        throw std::invalid_argument("sideways_energy: trajectory must store every state");
    const double len = gen.grid.b - gen.grid.a;
    if (!(tau > 2.0 * gamma0 * len))
        throw std::invalid_argument("sideways_energy: tau must exceed 2 gamma0 (b-a)");
    const double ds = traj.dt;
    if (traj.state_times.back() < tau - 1e-12)
        throw std::invalid_argument("sideways_energy: trajectory does not cover [0, tau]");
    if (tau - 2.0 * gamma0 * len < 8.0 * ds)
        throw std::invalid_argument("sideways_energy: fewer than 8 samples in smallest window");

    const int n = gen.grid.n, m = gen.m;
    const int steps = static_cast<int>(std::floor(tau / ds + 1e-9));
    std::vector<double> F(n + 1);

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int j = 0; j <= n; ++j) {
        const Eigen::MatrixXd Hinv = pointwise_density(gen, j).inverse();
        std::vector<double> g(steps + 1);
        for (int kk = 0; kk <= steps; ++kk) {
            const auto fj = traj.states[kk].segment(static_cast<Eigen::Index>(j) * m, m);
            g[kk] = fj.dot(Hinv * fj);  // x^* H x with x = H^{-1} f
        }
        const double dist = sign > 0 ? (gen.grid.b - gen.grid.nodes[j])
                                     : (gen.grid.nodes[j] - gen.grid.a);
        const double r = gamma0 * dist;
        F[j] = integrate_window(g, ds, r, tau - r);
    }
    return F;
}

}  // namespace

Eigen::VectorXd DiscreteGenerator::boundary_trace(const Eigen::VectorXd& f) const {
    Eigen::VectorXd v(2 * m);
    v.head(m) = f.tail(m);  // f(b)
    v.tail(m) = f.head(m);  // f(a)
    return v;
}

Eigen::VectorXd DiscreteGenerator::apply_projector(const Eigen::VectorXd& f) const {
    return f - U * (Sinv * (B * f));
}

DiscreteGenerator discretize(const ClosedLoopSystem& clsys, int n) {
    if (n < 8) throw std::invalid_argument("discretize: need n >= 8");
    if (clsys.rank_W != clsys.base.m)
        throw std::invalid_argument("discretize: boundary matrix W is rank deficient");

    DiscreteGenerator gen{clsys, SpatialGrid::build(clsys.base.density, n)};
    const int m = clsys.base.m;
    gen.m = m;
    gen.n = n;
    gen.N = m * (n + 1);
    const double h = gen.grid.h;
    const auto& P1 = clsys.base.P1;
    const auto& P0 = clsys.base.P0;

    std::vector<Triplet> ltrips, mtrips;
    for (int j = 0; j <= n; ++j) {
        const Eigen::MatrixXd& Hj = gen.grid.H[j];
        add_block(mtrips, j, j, m, gen.grid.weights(j) * gen.grid.Hinv[j]);
        const Eigen::MatrixXd HP1 = Hj * P1;
        if (j == 0) {
            add_block(ltrips, 0, 0, m, -HP1 / h + Hj * P0);
            add_block(ltrips, 0, 1, m, HP1 / h);
        } else if (j == n) {
            add_block(ltrips, n, n - 1, m, -HP1 / h);
            add_block(ltrips, n, n, m, HP1 / h + Hj * P0);
        } else {
            add_block(ltrips, j, j - 1, m, -HP1 / (2.0 * h));
            add_block(ltrips, j, j, m, Hj * P0);
            add_block(ltrips, j, j + 1, m, HP1 / (2.0 * h));
        }
    }
    gen.L.resize(gen.N, gen.N);
    gen.L.setFromTriplets(ltrips.begin(), ltrips.end());
    gen.M.resize(gen.N, gen.N);
    gen.M.setFromTriplets(mtrips.begin(), mtrips.end());

    // Constraint W (f_n; f_0) = 0 and the M-orthogonal projector onto it.
    gen.B = Eigen::MatrixXd::Zero(m, gen.N);
    gen.B.rightCols(m) = clsys.W.leftCols(m);   // f(b) part
    gen.B.leftCols(m) = clsys.W.rightCols(m);   // f(a) part
    gen.U = Eigen::MatrixXd::Zero(gen.N, m);
    gen.U.topRows(m) = gen.grid.H[0] * gen.B.leftCols(m).transpose() / gen.grid.weights(0);
    gen.U.bottomRows(m) =
        gen.grid.H[n] * gen.B.rightCols(m).transpose() / gen.grid.weights(n);
    gen.Sinv = (gen.B * gen.U).inverse();

    // A = L - U Sinv (B L): the correction touches only boundary-node rows.
    const Eigen::MatrixXd BL = gen.B * gen.L;           // m x N, near-boundary columns
    const Eigen::MatrixXd corr_top = gen.U.topRows(m) * gen.Sinv;    // m x m
    const Eigen::MatrixXd corr_bot = gen.U.bottomRows(m) * gen.Sinv;
    std::vector<Triplet> atrips;
    for (int i = 0; i < gen.L.outerSize(); ++i)
        for (Eigen::SparseMatrix<double>::InnerIterator it(gen.L, i); it; ++it)
            atrips.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < gen.N; ++c) {
        if (BL.col(c).isZero(0.0)) continue;
        const Eigen::VectorXd top = -corr_top * BL.col(c);
        const Eigen::VectorXd bot = -corr_bot * BL.col(c);
        for (int r = 0; r < m; ++r) {
            if (top(r) != 0.0) atrips.emplace_back(r, c, top(r));
            if (bot(r) != 0.0) atrips.emplace_back(gen.N - m + r, c, bot(r));
        }
    }
    gen.A.resize(gen.N, gen.N);
    gen.A.setFromTriplets(atrips.begin(), atrips.end());
    return gen;
}

Trajectory simulate(const DiscreteGenerator& gen, const Eigen::VectorXd& f0, double t_final,
                    double dt, int store_every) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
    if (f0.size() != gen.N) throw std::invalid_argument("simulate: state size mismatch");

    const int steps = static_cast<int>(std::llround(t_final / dt));
    Eigen::SparseMatrix<double> I(gen.N, gen.N);
    I.setIdentity();
    Eigen::SparseMatrix<double> Aminus = I - (0.5 * dt) * gen.A;
    Eigen::SparseMatrix<double> Aplus = I + (0.5 * dt) * gen.A;
    Aminus.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(Aminus);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("simulate: factorization of I - (dt/2) A_h failed");

    const Eigen::MatrixXd Q = boundary_form(gen.system.base.P1);
    Trajectory traj;
    traj.dt = dt;
    traj.store_every = store_every;
    traj.times.reserve(steps + 1);
    traj.energies.reserve(steps + 1);

    Eigen::VectorXd f = gen.apply_projector(f0);
    const double E0 = energy(gen.grid, f);
    auto record = [&](int k, const Eigen::VectorXd& fk, double Ek) {
        traj.times.push_back(k * dt);
        traj.energies.push_back(Ek);
        const Eigen::VectorXd v = gen.boundary_trace(fk);
        traj.traces.push_back(v);
        traj.inputs.push_back(gen.system.base.WB2 * v);
        traj.outputs.push_back(gen.system.base.WC * v);
        if (store_every > 0 && k % store_every == 0) {
            traj.state_times.push_back(k * dt);
            traj.states.push_back(fk);
        }
    };
    double Ek = E0;
    record(0, f, Ek);

    for (int k = 0; k < steps; ++k) {
        const Eigen::VectorXd fnext = lu.solve(Aplus * f);
        if (!fnext.allFinite())
            throw std::runtime_error("simulate: non-finite state at t = " +
                                     std::to_string((k + 1) * dt));
        const double Enext = energy(gen.grid, fnext);
        const Eigen::VectorXd vmid = gen.boundary_trace(0.5 * (f + fnext));
        const double balance = 2.0 * dt * vmid.dot(Q * vmid);
        traj.max_identity_residual =
            std::max(traj.max_identity_residual, std::abs(Enext - Ek - balance));
        traj.max_energy_increase = std::max(traj.max_energy_increase, Enext - Ek);
        f = fnext;
        Ek = Enext;
        record(k + 1, f, Ek);
    }
    return traj;
}

Eigen::MatrixXd reduced_generator(const DiscreteGenerator& gen) {
    if (gen.N > 5000) throw std::invalid_argument("spectrum: dense dimension cap (5000) exceeded");
    const int m = gen.m;
    // M = S^T S with S block-diagonal upper-triangular from per-node Cholesky.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(gen.N, gen.N);
    Eigen::MatrixXd Sinv = Eigen::MatrixXd::Zero(gen.N, gen.N);
    for (int j = 0; j <= gen.n; ++j) {
        const Eigen::MatrixXd Mj = gen.grid.weights(j) * gen.grid.Hinv[j];
        Eigen::LLT<Eigen::MatrixXd> llt(Mj);
        const Eigen::MatrixXd Lt = llt.matrixL().transpose();
        S.block(j * m, j * m, m, m) = Lt;
        Sinv.block(j * m, j * m, m, m) = Lt.inverse();
    }
    const Eigen::MatrixXd Ay = S * Eigen::MatrixXd(gen.A) * Sinv;
    const Eigen::MatrixXd Bs = gen.B * Sinv;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Bs.transpose());
    const Eigen::MatrixXd Qfull = qr.householderQ();
    const Eigen::MatrixXd K = Qfull.rightCols(gen.N - m);  // orthonormal kernel of Bs
    return K.transpose() * Ay * K;
}

Spectrum spectrum(const DiscreteGenerator& gen) {
    const Eigen::MatrixXd Ared = reduced_generator(gen);
    Eigen::EigenSolver<Eigen::MatrixXd> es(Ared);
    Spectrum sp;
    sp.abscissa = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        sp.eigenvalues.push_back(es.eigenvalues()(i));
        sp.abscissa = std::max(sp.abscissa, es.eigenvalues()(i).real());
    }
    return sp;
}

std::vector<double> sideways_energy(const DiscreteGenerator& gen, const Trajectory& traj,
                                    double gamma0, double tau, int sign) {
    return sideways_energy_impl(gen, traj, gamma0, tau, sign, true);
}

std::vector<double> sideways_energy_serial(const DiscreteGenerator& gen, const Trajectory& traj,
                                           double gamma0, double tau, int sign) {
    return sideways_energy_impl(gen, traj, gamma0, tau, sign, false);
}

std::vector<double> sideways_derivative_formula(const DiscreteGenerator& gen,
                                                const Trajectory& traj, double gamma0, double tau,
                                                int sign) {
    if (traj.store_every != 1 || traj.states.empty())
        throw std::invalid_argument("sideways_derivative_formula: need all states");
    const int n = gen.grid.n, m = gen.m;
    const double ds = traj.dt;
    const auto& density = gen.system.base.density;
    const Eigen::MatrixXd P1inv = gen.system.base.P1.inverse();
    const Eigen::MatrixXd P1invP0 = P1inv * gen.system.base.P0;
    const int steps = static_cast<int>(std::floor(tau / ds + 1e-9));
    const double sgn = sign > 0 ? 1.0 : -1.0;

    std::vector<double> out(n + 1);
#pragma omp parallel for schedule(dynamic, 8)
    for (int j = 0; j <= n; ++j) {
        const double z = gen.grid.nodes[j];
        const Side side = j == n ? Side::Left : Side::Right;
        const Eigen::MatrixXd H = density.evaluate(z, side);
        const Eigen::MatrixXd Hp = density.derivative(z, side);
        const Eigen::MatrixXd Hinv = H.inverse();
        const Eigen::MatrixXd mid =
            (P1invP0 * H).transpose() + Hp + P1invP0 * H;

        auto x_at = [&](double s) -> Eigen::VectorXd {
            const double p = s / ds;
            const int i = std::min(static_cast<int>(p), steps - 1);
            const double w = p - i;
            const Eigen::VectorXd fj =
                (1.0 - w) * traj.states[i].segment(static_cast<Eigen::Index>(j) * m, m) +
                w * traj.states[i + 1].segment(static_cast<Eigen::Index>(j) * m, m);
            return Hinv * fj;
        };

        const double dist = sign > 0 ? (gen.grid.b - z) : (z - gen.grid.a);
        const double r = gamma0 * dist, t = tau - gamma0 * dist;
        const Eigen::VectorXd xt = x_at(t), xr = x_at(r);
        double val = xt.dot((sgn * gamma0 * H + P1inv) * xt) +
                     xr.dot((sgn * gamma0 * H - P1inv) * xr);

        std::vector<double> g(steps + 1);
        for (int kk = 0; kk <= steps; ++kk) {
            const Eigen::VectorXd x =
                Hinv * traj.states[kk].segment(static_cast<Eigen::Index>(j) * m, m);
            g[kk] = x.dot(mid * x);
        }
        val -= integrate_window(g, ds, r, t);
        out[j] = val;
    }
    return out;
}

double fit_decay_rate(const Trajectory& traj, double t_lo, double t_hi) {
    std::vector<double> ts, ys;
    for (size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] < t_lo - 1e-12 || traj.times[k] > t_hi + 1e-12) continue;
        if (traj.energies[k] <= 0.0) return -std::numeric_limits<double>::infinity();
        ts.push_back(traj.times[k]);
        ys.push_back(0.5 * std::log(traj.energies[k]));
    }
    if (ts.size() < 8) throw std::invalid_argument("fit_decay_rate: fewer than 8 samples in window");
    const size_t n = ts.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < n; ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
}

CertificateCheck check_certificate(const Trajectory& traj, const DecayCertificate& cert) {
    CertificateCheck out;
    out.holds = true;
    out.min_margin = std::numeric_limits<double>::infinity();
    const double E0 = traj.energies.front();
    if (E0 == 0.0) {
        out.min_margin = 0.0;
        return out;
    }
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double env = energy_envelope(cert, E0, traj.times[k]);
        if (traj.energies[k] > env * (1.0 + 1e-6)) {
            out.holds = false;
            out.worst_time = traj.times[k];
        }
        out.min_margin = std::min(out.min_margin, (env - traj.energies[k]) / E0);
    }
    return out;
}

Eigen::VectorXd initial_state(const SpatialGrid& grid, const std::vector<GaussianBump>& bumps) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.m) * (grid.n + 1));
    for (const auto& bump : bumps) {
        if (bump.component < 0 || bump.component >= grid.m)
            throw std::invalid_argument("initial_state: bump component out of range");
        if (!(bump.width > 0.0)) throw std::invalid_argument("initial_state: width must be positive");
        for (int j = 0; j <= grid.n; ++j) {
            const double d = (grid.nodes[j] - bump.center) / bump.width;
            f(static_cast<Eigen::Index>(j) * grid.m + bump.component) +=
                bump.amplitude * std::exp(-0.5 * d * d);
        }
    }
    return f;
}

}  // namespace phstab
