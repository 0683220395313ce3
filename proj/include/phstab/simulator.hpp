#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "phstab/certificates.hpp"
#include "phstab/grid.hpp"
#include "phstab/phs_model.hpp"

namespace phstab {

/// Semi-discrete closed-loop generator A_h = P L on nodal f-states, where L
/// is the SBP difference operator scaled by the cell-averaged density and P
/// is the M-orthogonal projector onto { f : W (f_n; f_0) = 0 } with energy
/// weight M = blockdiag(sigma_j H_j^{-1}). The summation-by-parts identity
/// makes the discrete energy balance exact.
struct DiscreteGenerator {
    ClosedLoopSystem system;
    SpatialGrid grid;
    int m = 0, n = 0, N = 0;  // N = m (n+1)

    Eigen::SparseMatrix<double> L;  // unconstrained operator
    Eigen::SparseMatrix<double> A;  // P L
    Eigen::SparseMatrix<double> M;  // energy weight
    Eigen::MatrixXd B;              // constraint matrix W (f_n; f_0), m x N
    Eigen::MatrixXd U;              // M^{-1} B^T
    Eigen::MatrixXd Sinv;           // (B M^{-1} B^T)^{-1}

    Eigen::VectorXd apply_projector(const Eigen::VectorXd& f) const;
    Eigen::VectorXd boundary_trace(const Eigen::VectorXd& f) const;  // (f_n; f_0)
};

DiscreteGenerator discretize(const ClosedLoopSystem& clsys, int n);

struct Trajectory {
    double dt = 0.0;
    int store_every = 0;  // 0: no nodal states kept
    std::vector<double> times;
    std::vector<double> energies;
    std::vector<Eigen::VectorXd> traces;   // (f_n; f_0) per step
    std::vector<Eigen::VectorXd> inputs;   // u = WB2 v
    std::vector<Eigen::VectorXd> outputs;  // y = WC v
    std::vector<double> state_times;
    std::vector<Eigen::VectorXd> states;   // every store_every-th step
    double max_identity_residual = 0.0;    // max |dE - 2 dt v_mid^T Q v_mid|
    double max_energy_increase = 0.0;      // max over steps of E_{k+1} - E_k
};

/// Implicit-midpoint integration of f' = A_h f from the projected initial
/// state. The factorization of I - (dt/2) A_h is reused across steps.
Trajectory simulate(const DiscreteGenerator& gen, const Eigen::VectorXd& f0, double t_final,
                    double dt, int store_every = 0);

/// Dense generator in the M-symmetrized coordinates, deflated to the
/// constraint surface; its eigenvalues are the spectrum of A_h on range(P).
Eigen::MatrixXd reduced_generator(const DiscreteGenerator& gen);

struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    double abscissa = 0.0;
};

Spectrum spectrum(const DiscreteGenerator& gen);

/// Sideways energies F^{+}(z_j) (sign = +1) or F^{-}(z_j) (sign = -1):
/// time integrals of x^* H x at each node over the characteristic window.
/// Requires states stored at every step (store_every = 1).
std::vector<double> sideways_energy(const DiscreteGenerator& gen, const Trajectory& traj,
                                    double gamma0, double tau, int sign);
std::vector<double> sideways_energy_serial(const DiscreteGenerator& gen, const Trajectory& traj,
                                           double gamma0, double tau, int sign);

/// Per-node evaluation of the sideways-energy derivative formula for C^1
/// densities (boundary terms plus the integral term), from trajectory samples.
std::vector<double> sideways_derivative_formula(const DiscreteGenerator& gen,
                                                const Trajectory& traj, double gamma0, double tau,
                                                int sign);

/// Least-squares slope of (1/2) log E over [t_lo, t_hi]; -infinity when the
/// energy is nonpositive in the window (extinction).
double fit_decay_rate(const Trajectory& traj, double t_lo, double t_hi);

struct CertificateCheck {
    bool holds = false;
    double min_margin = 0.0;   // min over k of (envelope - E_k) / E_0
    double worst_time = 0.0;
};

CertificateCheck check_certificate(const Trajectory& traj, const DecayCertificate& cert);

/// Nodal state with Gaussian bumps in the f-variable.
struct GaussianBump {
    int component = 0;  // zero-based
    double amplitude = 1.0;
    double center = 0.5;
    double width = 0.1;
};

Eigen::VectorXd initial_state(const SpatialGrid& grid, const std::vector<GaussianBump>& bumps);

}  // namespace phstab
