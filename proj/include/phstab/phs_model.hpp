#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phstab/bv_density.hpp"
#include "phstab/grid.hpp"

namespace phstab {

/// Open-loop boundary-controlled plant x_t = P1 (Hx)_z + P0 Hx on [a, b],
/// with boundary trace v = ((Hx)(b); (Hx)(a)), homogeneous conditions
/// WB1 v = 0, input u = WB2 v and output y = WC v.
struct PortHamiltonianSystem {
    int m = 0;  // state dimension
    int k = 0;  // input/output dimension
    Eigen::MatrixXd P1;   // m x m, symmetric invertible
    Eigen::MatrixXd P0;   // m x m, skew-symmetric
    PiecewiseMatrixDensity density;
    Eigen::MatrixXd WB1;  // (m-k) x 2m
    Eigen::MatrixXd WB2;  // k x 2m
    Eigen::MatrixXd WC;   // k x 2m

    double a() const { return density.a(); }
    double b() const { return density.b(); }
};

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double residual = 0.0;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
};

ValidationReport validate_system(const PortHamiltonianSystem& sys);

/// Hermitian boundary form Q with Re<x, Ax>_X = v^* Q v for the trace
/// v = (f(b); f(a)), f = Hx; Q = (1/4) blockdiag(P1, -P1).
Eigen::MatrixXd boundary_form(const Eigen::MatrixXd& P1);

struct ClosedLoopSystem {
    PortHamiltonianSystem base;
    double mu = 0.0;
    Eigen::MatrixXd W;  // stack(WB1; WB2 + mu * WC), m x 2m
    int rank_W = 0;
};

ClosedLoopSystem close_loop(const PortHamiltonianSystem& sys, double mu);

/// Discrete H-energy (1/2) sum_j sigma_j f_j^* H_j^{-1} f_j of a nodal state
/// in the f = Hx variable.
double energy(const SpatialGrid& grid, const Eigen::VectorXd& f);

/// Clamped-left vibrating string with force input and velocity output at b.
PortHamiltonianSystem string_model(const PiecewiseMatrixDensity& rho,
                                   const PiecewiseMatrixDensity& T);

/// Clamped-left Timoshenko beam; inputs are force and torsional moment at b,
/// outputs the matching velocities.
PortHamiltonianSystem timoshenko_model(const PiecewiseMatrixDensity& rho,
                                       const PiecewiseMatrixDensity& EI,
                                       const PiecewiseMatrixDensity& Ir,
                                       const PiecewiseMatrixDensity& K);

}  // namespace phstab
