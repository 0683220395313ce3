#include "phstab/certificates.hpp"

#include <algorithm>
#include <cmath>

#include "phstab/quadrature.hpp"

namespace phstab {

namespace {

DecayCertificate build_chain(const PortHamiltonianSystem& sys, double mu, double kappa,
                             char endpoint, double lambda, bool sharpened) {
    DecayCertificate c;
    auto [mlo, mhi] = sys.density.bounds();
    c.m_lower = mlo;
    c.m_upper = mhi;
    c.m_bar_prime = sys.density.mbar_prime();
    const Eigen::MatrixXd P1inv = sys.P1.inverse();
    c.p1_inv_norm = op_norm(P1inv);
    c.p1_inv_p0_norm = op_norm(P1inv * sys.P0);
    c.length = sys.b() - sys.a();
    c.gamma0 = c.p1_inv_norm / c.m_lower;
    c.kappa0 = (2.0 * c.p1_inv_p0_norm * c.m_upper + c.m_bar_prime) / c.m_lower;
    c.t0 = 2.0 * c.gamma0 * c.length + 1.0;
    c.C0 = std::exp(c.kappa0 * c.length) * c.length / (2.0 * c.m_lower);
    c.lambda = lambda;
    c.kappa = kappa;
    const double q = c.C0 / (2.0 * c.kappa);
    c.mu0 = std::sqrt(q / (1.0 + q));
    c.M0 = 1.0 / c.mu0;
    c.omega0 = std::log(c.mu0) / c.t0;
    c.mu = mu;
    c.endpoint = endpoint;
    c.sharpened = sharpened;
    return c;
}

void require_hypotheses(const PortHamiltonianSystem& sys, TraceDomination& dom) {
    const auto pas = check_impedance_passive(sys);
    if (!pas.passive)
        throw HypothesisError("decay_certificate: hypothesis (i) fails (not impedance-passive)");
    dom = trace_domination(sys);
    if (!(dom.lambda > 0.0))
        throw HypothesisError("decay_certificate: hypothesis (ii) fails (no trace domination)");
}

}  // namespace

DecayCertificate decay_certificate(const PortHamiltonianSystem& sys, double mu) {
    if (!(mu > 0.0)) throw std::domain_error("decay_certificate: mu must be positive");
    TraceDomination dom;
    require_hypotheses(sys, dom);
    const double kappa = dom.lambda * std::min(1.0 / (2.0 * mu), mu / 2.0);
    return build_chain(sys, mu, kappa, dom.endpoint, dom.lambda, false);
}

DecayCertificate sharpened_certificate(const PortHamiltonianSystem& sys, double mu) {
    if (!(mu > 0.0)) throw std::domain_error("sharpened_certificate: mu must be positive");
    TraceDomination dom;
    require_hypotheses(sys, dom);
    const auto dis = check_dissipative(close_loop(sys, mu));
    if (!dis.dissipative)
        throw HypothesisError("sharpened_certificate: closed loop is not strictly dissipative");
    return build_chain(sys, mu, dis.kappa_best, dis.endpoint, dom.lambda, true);
}

double energy_envelope(const DecayCertificate& cert, double E0, double t) {
    if (t < 0.0) throw std::domain_error("energy_envelope: negative time");
    if (E0 < 0.0) throw std::domain_error("energy_envelope: negative initial energy");
    return cert.M0 * cert.M0 * std::exp(2.0 * cert.omega0 * t) * E0;
}

double certificate_residual(const DecayCertificate& c) {
    auto rel = [](double got, double want) {
        return std::abs(got - want) / std::max(1.0, std::abs(want));
    };
    double r = 0.0;
    r = std::max(r, rel(c.gamma0, c.p1_inv_norm / c.m_lower));
    r = std::max(r, rel(c.kappa0, (2.0 * c.p1_inv_p0_norm * c.m_upper + c.m_bar_prime) / c.m_lower));
    r = std::max(r, rel(c.t0, 2.0 * c.gamma0 * c.length + 1.0));
    r = std::max(r, rel(c.C0, std::exp(c.kappa0 * c.length) * c.length / (2.0 * c.m_lower)));
    if (!c.sharpened)
        r = std::max(r, rel(c.kappa, c.lambda * std::min(1.0 / (2.0 * c.mu), c.mu / 2.0)));
    const double q = c.C0 / (2.0 * c.kappa);
    r = std::max(r, rel(c.mu0, std::sqrt(q / (1.0 + q))));
    r = std::max(r, rel(c.M0, 1.0 / c.mu0));
    r = std::max(r, rel(c.omega0, std::log(c.mu0) / c.t0));
    return r;
}

}  // namespace phstab
