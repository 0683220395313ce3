// Timing comparison of the OpenMP kernels against their serial references:
// density mollification sampling and the per-node sideways-energy integrals.
#include <chrono>
#include <cstdio>

#include "phstab/bv_density.hpp"
#include "phstab/certificates.hpp"
#include "phstab/phs_model.hpp"
#include "phstab/simulator.hpp"

using namespace phstab;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

PortHamiltonianSystem bv_string() {
    auto rho = PiecewiseMatrixDensity::scalar_step(0.0, 1.0, 0.5, 1.0, 4.0);
    auto T = PiecewiseMatrixDensity::constant(0.0, 1.0, Eigen::MatrixXd::Identity(1, 1));
    return string_model(rho, T);
}

}  // namespace

int main() {
    const auto sys = bv_string();

    {
        const int samples = 2049;
        auto t0 = std::chrono::steady_clock::now();
        const auto serial = mollify_serial(sys.density, 0.05, samples);
        const double t_serial = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto parallel = mollify(sys.density, 0.05, samples);
        const double t_parallel = ms_since(t0);
        double max_diff = 0.0;
        for (int i = 0; i < samples; ++i)
            max_diff = std::max(max_diff, (serial.sample_values()[i] -
                                           parallel.sample_values()[i]).norm());
        std::printf("mollify        %4d samples  serial %8.2f ms  parallel %8.2f ms  "
                    "speedup %5.2fx  max diff %.3g\n",
                    samples, t_serial, t_parallel, t_serial / t_parallel, max_diff);
    }

    {
        const int n = 200;
        const auto gen = discretize(close_loop(sys, 1.0), n);
        const auto f0 = initial_state(gen.grid, {GaussianBump{0, 1.0, 0.5, 0.1}});
        const double dt = 0.5 / n;
        const auto traj = simulate(gen, f0, 10.0, dt, 1);
        const auto cert = decay_certificate(sys, 1.0);
        const double tau = 2.0 * cert.gamma0 + 1.0;

        auto t0 = std::chrono::steady_clock::now();
        const auto serial = sideways_energy_serial(gen, traj, cert.gamma0, tau, +1);
        const double t_serial = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto parallel = sideways_energy(gen, traj, cert.gamma0, tau, +1);
        const double t_parallel = ms_since(t0);
        double max_diff = 0.0;
        for (size_t i = 0; i < serial.size(); ++i)
            max_diff = std::max(max_diff, std::abs(serial[i] - parallel[i]));
        std::printf("sideways       %4d nodes    serial %8.2f ms  parallel %8.2f ms  "
                    "speedup %5.2fx  max diff %.3g\n",
                    n + 1, t_serial, t_parallel, t_serial / t_parallel, max_diff);
    }
    return 0;
}
