#include "phstab/conditions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "phstab/quadrature.hpp"

namespace phstab {

namespace {

double psd_tol(const Eigen::MatrixXd& M) { return 1e-12 * (1.0 + op_norm(M)); }

double lambda_min(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double lambda_max(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXd herm(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose().eval()); }

// lambda_c = inf{ z^* G z : z^* R z = 1 } for PSD G, R, via the Schur
// complement of G onto the range of R; the infimum over ker(R) directions is
// taken exactly.
double constrained_infimum(const Eigen::MatrixXd& G, const Eigen::MatrixXd& R) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(R);
    const auto& d = er.eigenvalues();
    const double rtol = 1e-12 * (1.0 + d.maxCoeff());
    std::vector<int> pos, ker;
    for (int i = 0; i < d.size(); ++i) (d(i) > rtol ? pos : ker).push_back(i);
    if (pos.empty()) return 0.0;

    Eigen::MatrixXd U1(d.size(), pos.size()), U0(d.size(), ker.size());
    Eigen::VectorXd d1(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) {
        U1.col(i) = er.eigenvectors().col(pos[i]);
        d1(i) = d(pos[i]);
    }
    for (size_t i = 0; i < ker.size(); ++i) U0.col(i) = er.eigenvectors().col(ker[i]);

    const Eigen::MatrixXd G11 = U1.transpose() * G * U1;
    Eigen::MatrixXd Sc = G11;
    if (!ker.empty()) {
        const Eigen::MatrixXd G10 = U1.transpose() * G * U0;
        const Eigen::MatrixXd G00 = U0.transpose() * G * U0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(G00);
        const double gtol = 1e-12 * (1.0 + eg.eigenvalues().maxCoeff());
        Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(G00.rows(), G00.cols());
        for (int i = 0; i < eg.eigenvalues().size(); ++i) {
            const double ev = eg.eigenvalues()(i);
            const auto q = eg.eigenvectors().col(i);
            if (ev > gtol) {
                pinv += q * q.transpose() / ev;
            } else if ((G10 * q).norm() > 1e-9 * (1.0 + op_norm(G))) {
                return 0.0;  // G null direction with coupling into range(R)
            }
        }
        Sc = G11 - G10 * pinv * G10.transpose();
    }
    const Eigen::VectorXd dis = d1.cwiseSqrt().cwiseInverse();
    const double lam = lambda_min(dis.asDiagonal() * Sc * dis.asDiagonal());
    return lam > 0.0 ? lam : 0.0;
}

// sup{ kappa >= 0 : S + kappa * R <= 0 } by bisection; -1 when S itself is
// not negative semidefinite.
double dissipation_margin(const Eigen::MatrixXd& S, const Eigen::MatrixXd& R) {
    const double tol = psd_tol(S);
    auto feasible = [&](double kappa) { return lambda_max(S + kappa * R) <= tol; };
    if (!feasible(0.0)) return -1.0;
    double hi = 1.0;
    while (feasible(hi) && hi < 1e12) hi *= 2.0;
    if (hi >= 1e12) return hi;  // trace at this endpoint vanishes on the kernel
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo <= 1e-10 ? 0.0 : lo;
}

}  // namespace

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& M, double rel_tol) {
    const int rows = static_cast<int>(M.rows()), cols = static_cast<int>(M.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    if (rank < rows) {
        std::ostringstream oss;
        oss << "kernel_basis: matrix is rank deficient (rank " << rank << " of " << rows
            << " rows); rows " << rank << ".." << rows - 1
            << " are linearly dependent on the earlier ones";
        throw std::invalid_argument(oss.str());
    }
    return svd.matrixV().rightCols(cols - rows);
}

Eigen::MatrixXd trace_selector(int m, char endpoint) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, 2 * m);
    if (endpoint == 'b')
        T.leftCols(m) = Eigen::MatrixXd::Identity(m, m);
    else if (endpoint == 'a')
        T.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
    else
        throw std::invalid_argument("trace_selector: endpoint must be 'a' or 'b'");
    return T;
}

PassivityResult check_impedance_passive(const PortHamiltonianSystem& sys) {
    const Eigen::MatrixXd N = kernel_basis(sys.WB1);
    const Eigen::MatrixXd S =
        herm(sys.WB2.transpose() * sys.WC) - boundary_form(sys.P1);
    const Eigen::MatrixXd Sr = N.transpose() * S * N;
    PassivityResult res;
    res.residual = lambda_min(Sr);
    res.passive = res.residual >= -psd_tol(Sr);
    res.preserving = op_norm(Sr) <= 1e-12;
    return res;
}

TraceDomination trace_domination(const PortHamiltonianSystem& sys) {
    const Eigen::MatrixXd N = kernel_basis(sys.WB1);
    const Eigen::MatrixXd G =
        N.transpose() *
        (sys.WB2.transpose() * sys.WB2 + sys.WC.transpose() * sys.WC) * N;
    TraceDomination out;
    for (char c : {'a', 'b'}) {
        const Eigen::MatrixXd Tc = trace_selector(sys.m, c);
        const Eigen::MatrixXd R = N.transpose() * Tc.transpose() * Tc * N;
        const double lam = constrained_infimum(G, R);
        (c == 'a' ? out.lambda_a : out.lambda_b) = lam;
    }
    // Tie between endpoints resolves to b.
    if (out.lambda_b >= out.lambda_a && out.lambda_b > 0.0) {
        out.lambda = out.lambda_b;
        out.endpoint = 'b';
    } else if (out.lambda_a > 0.0) {
        out.lambda = out.lambda_a;
        out.endpoint = 'a';
    }
    return out;
}

DissipativityResult check_dissipative(const ClosedLoopSystem& clsys) {
    const Eigen::MatrixXd N = kernel_basis(clsys.W);
    const Eigen::MatrixXd S =
        N.transpose() * boundary_form(clsys.base.P1) * N;
    DissipativityResult out;
    for (char c : {'a', 'b'}) {
        const Eigen::MatrixXd Tc = trace_selector(clsys.base.m, c);
        const Eigen::MatrixXd R = N.transpose() * Tc.transpose() * Tc * N;
        const double kappa = dissipation_margin(S, R);
        (c == 'a' ? out.kappa_a : out.kappa_b) = kappa;
    }
    if (out.kappa_b >= out.kappa_a) {
        out.kappa_best = out.kappa_b;
        out.endpoint = 'b';
    } else {
        out.kappa_best = out.kappa_a;
        out.endpoint = 'a';
    }
    if (out.kappa_best < 0.0) {
        out.kappa_best = 0.0;
        out.endpoint = 'n';
    }
    out.dissipative = out.kappa_best > 0.0;
    return out;
}

std::pair<int, bool> rank_check(const Eigen::MatrixXd& W) {
    if (W.size() == 0) return {0, false};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const auto& s = svd.singularValues();
    int r = 0;
    if (s(0) > 0.0)
        for (int i = 0; i < s.size(); ++i)
            if (s(i) > 1e-10 * s(0)) ++r;
    return {r, r == W.rows()};
}

ConditionReport run_condition_checks(const PortHamiltonianSystem& sys, double mu) {
    ConditionReport rep;
    rep.mu = mu;
    const auto pas = check_impedance_passive(sys);
    rep.impedance_passive = pas.passive;
    rep.impedance_preserving = pas.preserving;
    rep.passivity_residual = pas.residual;
    const auto dom = trace_domination(sys);
    rep.lambda = dom.lambda;
    rep.dominating_endpoint = dom.endpoint;
    rep.lambda_a = dom.lambda_a;
    rep.lambda_b = dom.lambda_b;
    const auto cl = close_loop(sys, mu);
    const auto [rank, full] = rank_check(cl.W);
    rep.rank_W = rank;
    rep.rank_full = full;
    if (full) {
        const auto dis = check_dissipative(cl);
        rep.closed_loop_dissipative = dis.dissipative;
        rep.kappa_best = dis.kappa_best;
        rep.dissipation_endpoint = dis.endpoint;
    }
    return rep;
}

}  // namespace phstab
