#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phstab/bv_density.hpp"
#include "phstab/phs_model.hpp"
#include "phstab/simulator.hpp"

namespace phstab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct NumericsConfig {
    int nodes = 400;
    double dt = 0.0;  // 0: resolved to h/2 when the grid is known
    double t_final = 10.0;
    double mollify_eps = 0.0;  // 0: simulate the raw BV density
};

struct CustomSystemConfig {
    int m = 0, k = 0;
    Eigen::MatrixXd P1, P0, WB1, WB2, WC;
};

/// Parsed and schema-validated experiment description; `raw_text` keeps the
/// original TOML so reports can echo the exact input.
struct ExperimentConfig {
    std::string model = "string";  // string | timoshenko | custom
    double a = 0.0, b = 1.0;
    double mu = 1.0;
    std::map<std::string, PiecewiseMatrixDensity> densities;
    std::optional<CustomSystemConfig> custom;
    std::vector<GaussianBump> initial;
    NumericsConfig numerics;
    std::string raw_text;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_config_text(const std::string& text);

/// Instantiates the configured plant; absent coefficient densities default to
/// the constant 1 on the interval.
PortHamiltonianSystem build_system(const ExperimentConfig& cfg);

/// Time step actually used: cfg dt, or h/2 for the configured node count.
double resolve_dt(const ExperimentConfig& cfg, const PortHamiltonianSystem& sys);

}  // namespace phstab
