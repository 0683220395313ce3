#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "phstab/certificates.hpp"
#include "phstab/commands.hpp"
#include "phstab/minitoml.hpp"

namespace {

struct Flags {
    std::string config_path;
    double mu = -1.0;
    int nodes = -1;
    double dt = -1.0;
    double tfinal = -1.0;
    phstab::commands::Options opts;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("config", f.config_path, "experiment config (TOML)")->required();
    cmd->add_option("--mu", f.mu, "feedback gain override");
    cmd->add_option("--nodes", f.nodes, "spatial node count override");
    cmd->add_option("--dt", f.dt, "time step override");
    cmd->add_option("--tfinal", f.tfinal, "final time override");
    cmd->add_option("--out", f.opts.out, "output path (or prefix for multi-file commands)");
}

phstab::ExperimentConfig load_with_overrides(const Flags& f) {
    auto cfg = phstab::load_config(f.config_path);
    if (f.mu > 0.0) cfg.mu = f.mu;
    if (f.nodes > 0) cfg.numerics.nodes = f.nodes;
    if (f.dt > 0.0) cfg.numerics.dt = f.dt;
    if (f.tfinal > 0.0) cfg.numerics.t_final = f.tfinal;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary-feedback stabilization toolkit for 1D port-Hamiltonian systems"};
    app.require_subcommand(1);

    Flags f;
    auto* check = app.add_subcommand("check", "verify passivity and trace-domination hypotheses");
    auto* certify = app.add_subcommand("certify", "evaluate the exponential decay certificate");
    auto* simulate = app.add_subcommand("simulate", "integrate the closed loop in time");
    auto* spectrum = app.add_subcommand("spectrum", "closed-loop eigenvalues and abscissa");
    auto* sweep = app.add_subcommand("sweep", "certified vs empirical decay across gains");
    auto* mollify = app.add_subcommand("mollify", "smooth the energy density and report bounds");
    for (auto* cmd : {check, certify, simulate, spectrum, sweep, mollify}) add_common(cmd, f);
    simulate->add_option("--dump-every", f.opts.dump_every, "store nodal state every k-th step");
    sweep->add_option("--mu-min", f.opts.mu_min, "smallest gain");
    sweep->add_option("--mu-max", f.opts.mu_max, "largest gain");
    sweep->add_option("--steps", f.opts.steps, "number of gains (log-spaced)");
    mollify->add_option("--eps", f.opts.eps, "mollification radius");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_with_overrides(f);
        if (check->parsed()) return phstab::commands::cmd_check(cfg, f.opts);
        if (certify->parsed()) return phstab::commands::cmd_certify(cfg, f.opts);
        if (simulate->parsed()) return phstab::commands::cmd_simulate(cfg, f.opts);
        if (spectrum->parsed()) return phstab::commands::cmd_spectrum(cfg, f.opts);
        if (sweep->parsed()) return phstab::commands::cmd_sweep(cfg, f.opts);
        if (mollify->parsed()) return phstab::commands::cmd_mollify(cfg, f.opts);
    } catch (const phstab::HypothesisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const phstab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const phstab::toml::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
