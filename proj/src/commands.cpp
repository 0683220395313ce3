#include "phstab/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "phstab/certificates.hpp"
#include "phstab/conditions.hpp"
#include "phstab/simulator.hpp"

namespace phstab::commands {

using nlohmann::json;

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << text;
}

std::string prefix_or(const Options& opts, const char* fallback) {
    return opts.out.empty() ? fallback : opts.out;
}

PortHamiltonianSystem configured_system(const ExperimentConfig& cfg, bool apply_mollify) {
    PortHamiltonianSystem sys = build_system(cfg);
    if (apply_mollify && cfg.numerics.mollify_eps > 0.0)
        sys.density = to_piecewise(mollify(sys.density, cfg.numerics.mollify_eps));
    return sys;
}

std::vector<GaussianBump> initial_bumps(const ExperimentConfig& cfg) {
    if (!cfg.initial.empty()) return cfg.initial;
    return {GaussianBump{0, 1.0, 0.5 * (cfg.a + cfg.b), 0.1 * (cfg.b - cfg.a)}};
}

json cert_to_json(const DecayCertificate& c) {
    return json{{"m_lower", c.m_lower},
                {"m_upper", c.m_upper},
                {"m_bar_prime", c.m_bar_prime},
                {"p1_inv_norm", c.p1_inv_norm},
                {"p1_inv_p0_norm", c.p1_inv_p0_norm},
                {"length", c.length},
                {"gamma0", c.gamma0},
                {"kappa0", c.kappa0},
                {"t0", c.t0},
                {"C0", c.C0},
                {"lambda", c.lambda},
                {"kappa", c.kappa},
                {"mu0", c.mu0},
                {"M0", c.M0},
                {"omega0", c.omega0},
                {"mu", c.mu},
                {"endpoint", std::string(1, c.endpoint)},
                {"sharpened", c.sharpened},
                {"residual", certificate_residual(c)}};
}

json report_to_json(const ConditionReport& r) {
    return json{{"impedance_passive", r.impedance_passive},
                {"impedance_preserving", r.impedance_preserving},
                {"passivity_residual", r.passivity_residual},
                {"lambda", r.lambda},
                {"dominating_endpoint", std::string(1, r.dominating_endpoint)},
                {"lambda_a", r.lambda_a},
                {"lambda_b", r.lambda_b},
                {"closed_loop_dissipative", r.closed_loop_dissipative},
                {"kappa_best", r.kappa_best},
                {"dissipation_endpoint", std::string(1, r.dissipation_endpoint)},
                {"rank_W", r.rank_W},
                {"rank_full", r.rank_full},
                {"mu", r.mu},
                {"hypotheses_hold", r.hypotheses_hold()}};
}

}  // namespace

int cmd_check(const ExperimentConfig& cfg, const Options& opts) {
    const auto sys = configured_system(cfg, true);
    const auto report = run_condition_checks(sys, cfg.mu);
    json j{{"command", "check"}, {"report", report_to_json(report)}, {"config", cfg.raw_text}};
    emit(opts.out, j.dump(2) + "\n");
    return report.hypotheses_hold() ? 0 : 2;
}

int cmd_certify(const ExperimentConfig& cfg, const Options& opts) {
    const auto sys = configured_system(cfg, true);
    const auto cert = decay_certificate(sys, cfg.mu);
    const auto sharp = sharpened_certificate(sys, cfg.mu);
    json j{{"command", "certify"},
           {"certificate", cert_to_json(cert)},
           {"sharpened", cert_to_json(sharp)},
           {"formulas",
            {"gamma0 = |P1^-1| / m_lower",
             "kappa0 = (2 |P1^-1 P0| m_upper + m_bar_prime) / m_lower",
             "t0 = 2 gamma0 (b - a) + 1", "C0 = exp(kappa0 (b - a)) (b - a) / (2 m_lower)",
             "kappa = lambda min(1/(2 mu), mu/2)",
             "mu0 = sqrt((C0/(2 kappa)) / (1 + C0/(2 kappa)))", "M0 = 1 / mu0",
             "omega0 = log(mu0) / t0", "envelope: E(t) <= M0^2 exp(2 omega0 t) E(0)"}},
           {"config", cfg.raw_text}};
    emit(opts.out, j.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, const Options& opts) {
    const auto sys = configured_system(cfg, true);
    const auto gen = discretize(close_loop(sys, cfg.mu), cfg.numerics.nodes);
    const auto f0 = initial_state(gen.grid, initial_bumps(cfg));
    const double dt = resolve_dt(cfg, sys);
    const auto traj = simulate(gen, f0, cfg.numerics.t_final, dt, opts.dump_every);

    std::ostringstream csv;
    csv << "t,E";
    for (int i = 0; i < sys.k; ++i) csv << ",u" << i;
    for (int i = 0; i < sys.k; ++i) csv << ",y" << i;
    csv << "\n";
    for (size_t s = 0; s < traj.times.size(); ++s) {
        csv << g17(traj.times[s]) << "," << g17(traj.energies[s]);
        for (int i = 0; i < sys.k; ++i) csv << "," << g17(traj.inputs[s][i]);
        for (int i = 0; i < sys.k; ++i) csv << "," << g17(traj.outputs[s][i]);
        csv << "\n";
    }
    const std::string prefix = prefix_or(opts, "simulate");
    emit(prefix + ".csv", csv.str());

    if (opts.dump_every > 0) {
        std::ostringstream dump;
        dump << "t";
        for (int i = 0; i < gen.N; ++i) dump << ",f" << i;
        dump << "\n";
        for (size_t s = 0; s < traj.state_times.size(); ++s) {
            dump << g17(traj.state_times[s]);
            for (int i = 0; i < gen.N; ++i) dump << "," << g17(traj.states[s][i]);
            dump << "\n";
        }
        emit(prefix + "_states.csv", dump.str());
    }

    json j{{"command", "simulate"},
           {"nodes", cfg.numerics.nodes},
           {"dt", dt},
           {"t_final", cfg.numerics.t_final},
           {"E0", traj.energies.front()},
           {"E_final", traj.energies.back()},
           {"max_identity_residual", traj.max_identity_residual},
           {"max_energy_increase", traj.max_energy_increase},
           {"config", cfg.raw_text}};
    try {
        const auto cert = decay_certificate(sys, cfg.mu);
        const auto check = check_certificate(traj, cert);
        j["certificate"] = cert_to_json(cert);
        j["certificate_check"] = json{{"holds", check.holds},
                                      {"min_margin", check.min_margin},
                                      {"worst_time", check.worst_time}};
    } catch (const HypothesisError& e) {
        j["certificate"] = nullptr;
        j["certificate_check"] = json{{"holds", false}, {"reason", e.what()}};
    }
    emit(prefix + ".json", j.dump(2) + "\n");
    return 0;
}

int cmd_spectrum(const ExperimentConfig& cfg, const Options& opts) {
    const auto sys = configured_system(cfg, true);
    const auto gen = discretize(close_loop(sys, cfg.mu), cfg.numerics.nodes);
    const auto spec = spectrum(gen);
    std::ostringstream csv;
    csv << "re,im\n";
    for (const auto& ev : spec.eigenvalues)
        csv << g17(ev.real()) << "," << g17(ev.imag()) << "\n";
    csv << "# abscissa," << g17(spec.abscissa) << "\n";
    emit(opts.out, csv.str());
    return 0;
}

std::vector<SweepRow> sweep_table(const ExperimentConfig& cfg, double mu_min, double mu_max,
                                  int steps) {
    if (!(mu_min > 0.0) || !(mu_max > mu_min) || steps < 2)
        throw std::invalid_argument("sweep: need 0 < mu_min < mu_max and steps >= 2");
    const auto sys = configured_system(cfg, true);
    const auto bumps = initial_bumps(cfg);
    const double dt = resolve_dt(cfg, sys);
    std::vector<SweepRow> rows(steps);
    std::string error;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < steps; ++i) {
        try {
            const double mu =
                mu_min * std::pow(mu_max / mu_min, double(i) / double(steps - 1));
            SweepRow row;
            row.mu = mu;
            const auto cert = decay_certificate(sys, mu);
            row.lambda = cert.lambda;
            row.kappa = cert.kappa;
            row.omega0 = cert.omega0;
            const auto gen = discretize(close_loop(sys, mu), cfg.numerics.nodes);
            const auto f0 = initial_state(gen.grid, bumps);
            const auto traj = simulate(gen, f0, cfg.numerics.t_final, dt);
            row.omega_hat =
                fit_decay_rate(traj, 0.5 * cfg.numerics.t_final, cfg.numerics.t_final);
            row.abscissa = spectrum(gen).abscissa;
            rows[i] = row;
        } catch (const std::exception& e) {
#pragma omp critical
            if (error.empty()) error = e.what();
        }
    }
    if (!error.empty()) throw std::runtime_error("sweep: " + error);
    return rows;
}

int cmd_sweep(const ExperimentConfig& cfg, const Options& opts) {
    const auto rows = sweep_table(cfg, opts.mu_min, opts.mu_max, opts.steps);
    std::ostringstream csv;
    csv << "mu,lambda,kappa,omega0,omega_hat,abscissa\n";
    for (const auto& r : rows)
        csv << g17(r.mu) << "," << g17(r.lambda) << "," << g17(r.kappa) << "," << g17(r.omega0)
            << "," << g17(r.omega_hat) << "," << g17(r.abscissa) << "\n";
    emit(opts.out, csv.str());
    return 0;
}

int cmd_mollify(const ExperimentConfig& cfg, const Options& opts) {
    const auto sys = build_system(cfg);
    const double eps = opts.eps;
    if (!(eps > 0.0)) throw std::invalid_argument("mollify: eps must be positive");
    const auto smooth = mollify(sys.density, eps);

    const int m = smooth.dim();
    std::ostringstream csv;
    csv << "zeta";
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) csv << ",H" << i << j;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) csv << ",dH" << i << j;
    csv << "\n";
    for (int s = 0; s < smooth.num_samples(); ++s) {
        csv << g17(smooth.sample_points()[s]);
        const auto& H = smooth.sample_values()[s];
        const auto& dH = smooth.sample_derivatives()[s];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) csv << "," << g17(H(i, j));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) csv << "," << g17(dH(i, j));
        csv << "\n";
    }
    const std::string prefix = prefix_or(opts, "mollify");
    emit(prefix + ".csv", csv.str());

    const auto [src_lo, src_hi] = sys.density.bounds();
    const auto [sm_lo, sm_hi] = smooth.bounds_at_samples();
    const double var_smooth = smooth.total_variation();
    const double mbar_prime = sys.density.mbar_prime();
    const double tol = 1e-10 * (1.0 + src_hi);
    json j{{"command", "mollify"},
           {"eps", eps},
           {"source_bounds", {src_lo, src_hi}},
           {"smooth_bounds_at_samples", {sm_lo, sm_hi}},
           {"bounds_preserved", sm_lo >= src_lo - tol && sm_hi <= src_hi + tol},
           {"variation_smooth", var_smooth},
           {"variation_source", sys.density.total_variation()},
           {"m_bar_prime", mbar_prime},
           {"variation_bound_holds", var_smooth <= mbar_prime + tol},
           {"config", cfg.raw_text}};
    emit(prefix + ".json", j.dump(2) + "\n");
    return 0;
}

}  // namespace phstab::commands
