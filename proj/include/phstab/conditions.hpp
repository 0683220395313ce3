#pragma once

#include <utility>

#include <Eigen/Dense>

#include "phstab/phs_model.hpp"

namespace phstab {

/// Orthonormal basis of the kernel of a full-row-rank matrix; throws
/// std::invalid_argument when M is rank deficient.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& M, double rel_tol = 1e-10);

struct PassivityResult {
    bool passive = false;
    bool preserving = false;
    double residual = 0.0;  // most negative eigenvalue of the passivity form
};

/// Corollary condition (i): Re<x, Ax> <= (Bx)^* Cx, checked as positive
/// semidefiniteness of Herm(WB2^* WC) - Q on ker(WB1).
PassivityResult check_impedance_passive(const PortHamiltonianSystem& sys);

struct TraceDomination {
    double lambda = 0.0;
    char endpoint = 'n';  // 'a', 'b', or 'n' for none
    double lambda_a = 0.0;
    double lambda_b = 0.0;
};

/// Corollary condition (ii): the largest lambda with
/// |Bx|^2 + |Cx|^2 >= lambda |(Hx)(c)|^2 on ker(WB1), per endpoint.
TraceDomination trace_domination(const PortHamiltonianSystem& sys);

struct DissipativityResult {
    bool dissipative = false;
    double kappa_best = 0.0;
    char endpoint = 'n';
    double kappa_a = 0.0;
    double kappa_b = 0.0;
};

/// Largest kappa with Re<x, Ax> <= -kappa |(Hx)(c)|^2 on ker(W), per endpoint.
DissipativityResult check_dissipative(const ClosedLoopSystem& clsys);

std::pair<int, bool> rank_check(const Eigen::MatrixXd& W);

struct ConditionReport {
    bool impedance_passive = false;
    bool impedance_preserving = false;
    double passivity_residual = 0.0;
    double lambda = 0.0;
    char dominating_endpoint = 'n';
    double lambda_a = 0.0, lambda_b = 0.0;
    bool closed_loop_dissipative = false;
    double kappa_best = 0.0;
    char dissipation_endpoint = 'n';
    int rank_W = 0;
    bool rank_full = false;
    double mu = 0.0;

    bool hypotheses_hold() const { return impedance_passive && lambda > 0.0; }
};

ConditionReport run_condition_checks(const PortHamiltonianSystem& sys, double mu);

/// Trace selector at an endpoint: T_c v = f(c) for v = (f(b); f(a)).
Eigen::MatrixXd trace_selector(int m, char endpoint);

}  // namespace phstab
