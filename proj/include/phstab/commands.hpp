#pragma once

#include <string>
#include <vector>

#include "phstab/config.hpp"

namespace phstab::commands {

struct Options {
    std::string out;      // output path or prefix; empty -> stdout / command name
    int dump_every = 0;   // simulate: nodal state dump cadence (0 = off)
    double mu_min = 0.25;
    double mu_max = 4.0;
    int steps = 9;
    double eps = 0.05;    // mollify
};

struct SweepRow {
    double mu = 0.0;
    double lambda = 0.0;
    double kappa = 0.0;
    double omega0 = 0.0;
    double omega_hat = 0.0;
    double abscissa = 0.0;
};

/// Certified and empirical decay data on a log grid of feedback gains; the
/// per-gain runs are independent and fan out across threads.
std::vector<SweepRow> sweep_table(const ExperimentConfig& cfg, double mu_min, double mu_max,
                                  int steps);

int cmd_check(const ExperimentConfig& cfg, const Options& opts);
int cmd_certify(const ExperimentConfig& cfg, const Options& opts);
int cmd_simulate(const ExperimentConfig& cfg, const Options& opts);
int cmd_spectrum(const ExperimentConfig& cfg, const Options& opts);
int cmd_sweep(const ExperimentConfig& cfg, const Options& opts);
int cmd_mollify(const ExperimentConfig& cfg, const Options& opts);

/// 17-significant-digit decimal rendering used for all CSV/JSON numbers.
std::string g17(double x);

}  // namespace phstab::commands
