#pragma once

#include <stdexcept>
#include <string>

#include "phstab/conditions.hpp"
#include "phstab/phs_model.hpp"

namespace phstab {

/// Raised when one of the closed-loop hypotheses fails, so no certificate
/// can be issued.
class HypothesisError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Explicit exponential-decay certificate: the full constant chain together
/// with the inputs it was evaluated from. Every field satisfies its defining
/// formula and is re-checkable by `certificate_residual`.
struct DecayCertificate {
    double m_lower = 0.0;    // lower eigenvalue bound of the density
    double m_upper = 0.0;    // upper eigenvalue bound
    double m_bar_prime = 0.0;  // ||H(a)|| + Var(H) + ||H(b)||
    double p1_inv_norm = 0.0;
    double p1_inv_p0_norm = 0.0;
    double length = 0.0;     // b - a
    double gamma0 = 0.0;     // ||P1^{-1}|| / m_lower, time per length
    double kappa0 = 0.0;     // (2 ||P1^{-1}P0|| m_upper + m_bar_prime) / m_lower
    double t0 = 0.0;         // 2 gamma0 (b-a) + 1
    double C0 = 0.0;         // e^{kappa0 (b-a)} (b-a) / (2 m_lower)
    double lambda = 0.0;     // trace-domination constant
    double kappa = 0.0;      // lambda * min(1/(2 mu), mu/2)
    double mu0 = 0.0;        // sqrt((C0/(2 kappa)) / (1 + C0/(2 kappa)))
    double M0 = 0.0;         // 1 / mu0
    double omega0 = 0.0;     // log(mu0) / t0
    double mu = 0.0;         // feedback gain
    char endpoint = 'n';     // dominating endpoint
    bool sharpened = false;  // true when kappa comes from check_dissipative
};

/// Evaluates the certificate chain for the closed loop with gain mu; throws
/// HypothesisError when passivity or trace domination fails.
DecayCertificate decay_certificate(const PortHamiltonianSystem& sys, double mu);

/// Same chain but with kappa replaced by the (possibly larger) value from
/// check_dissipative; an extension beyond the analytic chain.
DecayCertificate sharpened_certificate(const PortHamiltonianSystem& sys, double mu);

/// Energy envelope M0^2 e^{2 omega0 t} E0.
double energy_envelope(const DecayCertificate& cert, double E0, double t);

/// Largest relative defect over all defining formulas of the chain.
double certificate_residual(const DecayCertificate& cert);

}  // namespace phstab
