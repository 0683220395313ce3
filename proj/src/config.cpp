#include "phstab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "phstab/minitoml.hpp"

namespace phstab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

double require_number(const toml::Value& v, const std::string& field) {
    if (!v.is_number()) fail("field '" + field + "' must be a number");
    return v.as_number();
}

double get_number(const toml::Table& tbl, const std::string& key, double fallback) {
    const auto* v = toml::find(tbl, key);
    return v ? require_number(*v, key) : fallback;
}

std::vector<double> number_list(const toml::Value& v, const std::string& field) {
    if (!v.is_array()) fail("field '" + field + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v.as_array()) out.push_back(require_number(e, field));
    return out;
}

Eigen::MatrixXd matrix_from_flat(const std::vector<double>& flat, int rows, int cols,
                                 const std::string& field) {
    if (static_cast<int>(flat.size()) != rows * cols)
        fail("field '" + field + "' has " + std::to_string(flat.size()) + " entries, expected " +
             std::to_string(rows) + "x" + std::to_string(cols));
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = flat[i * cols + j];
    return M;
}

PiecewiseMatrixDensity parse_density(const toml::Table& tbl, double a, double b,
                                     const std::string& name) {
    const auto* bp = toml::find(tbl, "breakpoints");
    const auto* pc = toml::find(tbl, "pieces");
    if (!bp || !pc) fail("density '" + name + "' needs 'breakpoints' and 'pieces'");
    const auto breakpoints = number_list(*bp, name + ".breakpoints");
    if (breakpoints.size() < 2) fail("density '" + name + "' needs at least two breakpoints");
    for (size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            fail("density '" + name + "' breakpoints out of order");
    if (std::abs(breakpoints.front() - a) > 1e-14 || std::abs(breakpoints.back() - b) > 1e-14)
        fail("density '" + name + "' breakpoints must span the interval [" + std::to_string(a) +
             ", " + std::to_string(b) + "]");
    if (!pc->is_array()) fail("density '" + name + "' pieces must be an array");
    const auto& pieces_arr = pc->as_array();
    if (pieces_arr.size() + 1 != breakpoints.size())
        fail("density '" + name + "' needs one piece per breakpoint gap");
    std::vector<MatrixPoly> pieces;
    for (size_t p = 0; p < pieces_arr.size(); ++p) {
        if (!pieces_arr[p].is_array() || pieces_arr[p].as_array().empty())
            fail("density '" + name + "' piece " + std::to_string(p) +
                 " must be a nonempty array of coefficient matrices");
        std::vector<Eigen::MatrixXd> coeffs;
        for (const auto& cv : pieces_arr[p].as_array()) {
            const auto flat = number_list(cv, name + ".pieces");
            const int dim = static_cast<int>(std::lround(std::sqrt(double(flat.size()))));
            if (dim * dim != static_cast<int>(flat.size()))
                fail("density '" + name + "' coefficient is not a square matrix");
            coeffs.push_back(matrix_from_flat(flat, dim, dim, name + ".pieces"));
        }
        pieces.emplace_back(std::move(coeffs));
    }
    return PiecewiseMatrixDensity(breakpoints, std::move(pieces));
}

CustomSystemConfig parse_custom(const toml::Table& tbl) {
    CustomSystemConfig c;
    const auto* mv = toml::find(tbl, "m");
    const auto* kv = toml::find(tbl, "k");
    if (!mv || !kv) fail("[custom] needs 'm' and 'k'");
    c.m = static_cast<int>(require_number(*mv, "custom.m"));
    c.k = static_cast<int>(require_number(*kv, "custom.k"));
    if (c.m < 1 || c.k < 1 || c.k > c.m) fail("[custom] dimensions must satisfy 1 <= k <= m");
    auto mat = [&](const std::string& key, int rows, int cols) {
        const auto* v = toml::find(tbl, key);
        if (!v) fail("[custom] missing '" + key + "'");
        return matrix_from_flat(number_list(*v, "custom." + key), rows, cols, "custom." + key);
    };
    c.P1 = mat("P1", c.m, c.m);
    c.P0 = mat("P0", c.m, c.m);
    c.WB1 = mat("WB1", c.m - c.k, 2 * c.m);
    c.WB2 = mat("WB2", c.k, 2 * c.m);
    c.WC = mat("WC", c.k, 2 * c.m);
    const double skew = (c.P0 + c.P0.transpose()).norm();
    if (skew > 1e-12 * (1.0 + c.P0.norm()))
        fail("P0 skew-Hermitian residual " + std::to_string(skew));
    return c;
}

}  // namespace

ExperimentConfig load_config_text(const std::string& text) {
    const toml::Table root = toml::parse(text);
    ExperimentConfig cfg;
    cfg.raw_text = text;

    if (const auto* v = toml::find(root, "model")) {
        if (!v->is_string()) fail("'model' must be a string");
        cfg.model = v->as_string();
    }
    static const std::set<std::string> models{"string", "timoshenko", "custom"};
    if (!models.count(cfg.model)) fail("unknown model '" + cfg.model + "'");

    if (const auto* v = toml::find(root, "interval")) {
        const auto iv = number_list(*v, "interval");
        if (iv.size() != 2) fail("'interval' must be [a, b]");
        cfg.a = iv[0];
        cfg.b = iv[1];
        if (!(cfg.a < cfg.b)) fail("'interval' must satisfy a < b");
    }
    cfg.mu = get_number(root, "mu", 1.0);
    if (!(cfg.mu > 0.0)) fail("'mu' must be positive");

    if (const auto* v = toml::find(root, "density")) {
        if (!v->is_array()) fail("[[density]] must be an array of tables");
        for (const auto& dv : v->as_array()) {
            const auto& dt = dv.as_table();
            const auto* nv = toml::find(dt, "name");
            if (!nv || !nv->is_string()) fail("each [[density]] needs a string 'name'");
            if (cfg.densities.count(nv->as_string()))
                fail("duplicate density '" + nv->as_string() + "'");
            cfg.densities.emplace(nv->as_string(),
                                  parse_density(dt, cfg.a, cfg.b, nv->as_string()));
        }
    }

    if (const auto* v = toml::find(root, "initial")) {
        if (!v->is_array()) fail("[[initial]] must be an array of tables");
        for (const auto& bv : v->as_array()) {
            const auto& bt = bv.as_table();
            GaussianBump bump;
            bump.component = static_cast<int>(get_number(bt, "component", 0));
            bump.amplitude = get_number(bt, "amplitude", 1.0);
            bump.center = get_number(bt, "center", 0.5 * (cfg.a + cfg.b));
            bump.width = get_number(bt, "width", 0.1);
            if (!(bump.width > 0.0)) fail("initial bump width must be positive");
            cfg.initial.push_back(bump);
        }
    }

    if (const auto* v = toml::find(root, "numerics")) {
        if (!v->is_table()) fail("[numerics] must be a table");
        const auto& nt = v->as_table();
        cfg.numerics.nodes = static_cast<int>(get_number(nt, "nodes", 400));
        cfg.numerics.dt = get_number(nt, "dt", 0.0);
        cfg.numerics.t_final = get_number(nt, "t_final", 10.0);
        cfg.numerics.mollify_eps = get_number(nt, "mollify_eps", 0.0);
        if (cfg.numerics.nodes < 8) fail("'numerics.nodes' must be at least 8");
        if (cfg.numerics.dt < 0.0) fail("'numerics.dt' must be nonnegative");
        if (!(cfg.numerics.t_final > 0.0)) fail("'numerics.t_final' must be positive");
        if (cfg.numerics.mollify_eps < 0.0) fail("'numerics.mollify_eps' must be nonnegative");
    }

    if (cfg.model == "custom") {
        const auto* v = toml::find(root, "custom");
        if (!v || !v->is_table()) fail("model \"custom\" needs a [custom] table");
        cfg.custom = parse_custom(v->as_table());
        if (!cfg.densities.count("H")) fail("model \"custom\" needs a density named 'H'");
        if (cfg.densities.at("H").dim() != cfg.custom->m)
            fail("density 'H' dimension does not match custom.m");
    } else {
        static const std::map<std::string, std::vector<std::string>> allowed{
            {"string", {"rho", "T"}}, {"timoshenko", {"rho", "EI", "Ir", "K"}}};
        const auto& names = allowed.at(cfg.model);
        for (const auto& [name, d] : cfg.densities) {
            if (std::find(names.begin(), names.end(), name) == names.end())
                fail("density '" + name + "' is not a coefficient of model '" + cfg.model + "'");
            if (d.dim() != 1) fail("density '" + name + "' must be scalar (1x1)");
        }
    }
    for (const auto& bump : cfg.initial) {
        const int m = cfg.model == "string" ? 2 : (cfg.model == "timoshenko" ? 4 : cfg.custom->m);
        if (bump.component < 0 || bump.component >= m)
            fail("initial bump component out of range");
        if (bump.center < cfg.a || bump.center > cfg.b)
            fail("initial bump center outside the interval");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    std::ostringstream oss;
    oss << in.rdbuf();
    try {
        return load_config_text(oss.str());
    } catch (const toml::ParseError& e) {
        throw ConfigError(e.what());
    }
}

PortHamiltonianSystem build_system(const ExperimentConfig& cfg) {
    auto coeff = [&](const std::string& name) {
        auto it = cfg.densities.find(name);
        if (it != cfg.densities.end()) return it->second;
        return PiecewiseMatrixDensity::constant(cfg.a, cfg.b, Eigen::MatrixXd::Identity(1, 1));
    };
    if (cfg.model == "string") return string_model(coeff("rho"), coeff("T"));
    if (cfg.model == "timoshenko")
        return timoshenko_model(coeff("rho"), coeff("EI"), coeff("Ir"), coeff("K"));
    const auto& c = *cfg.custom;
    PortHamiltonianSystem sys{c.m,  c.k,   c.P1, c.P0, cfg.densities.at("H"),
                              c.WB1, c.WB2, c.WC};
    const auto report = validate_system(sys);
    if (!report.all_passed()) {
        for (const auto& chk : report.checks)
            if (!chk.passed) fail("custom system check failed: " + chk.name);
    }
    return sys;
}

double resolve_dt(const ExperimentConfig& cfg, const PortHamiltonianSystem& sys) {
    if (cfg.numerics.dt > 0.0) return cfg.numerics.dt;
    const double h = (sys.b() - sys.a()) / cfg.numerics.nodes;
    return 0.5 * h;
}

}  // namespace phstab
