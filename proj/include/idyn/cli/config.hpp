#pragma once

// YAML run configurations. Parameter sequences are closed-form expressions
// (see expression.hpp); every error names the offending field and line.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "idyn/analysis.hpp"
#include "idyn/cli/expression.hpp"
#include "idyn/error.hpp"
#include "idyn/model.hpp"

namespace idyn::cli {

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

struct KernelConfig {
    std::string type = "laplace";
    std::string dispersal = "2 + sin(t/3)";
    std::string expr;                 // custom: k(t, x, y)
    std::optional<double> k0;
};

struct GrowthConfig {
    std::string type = "beverton-holt";
    double alpha = 0.5;
    std::string gamma = "3 - sin(t*x/5)";
    // Ricker: gamma_t = gamma_limit (1 + c (k0 gamma_limit)^t) unless `gamma` is given
    std::optional<double> gamma_limit;
    double c = 0.0;
};

struct ModelConfig {
    double a = -3.0;
    double b = 3.0;
    KernelConfig kernel;
    GrowthConfig growth;
    std::optional<std::string> inhomogeneity;
    std::optional<Time> first;
    std::optional<Time> last;
};

struct DiscretizationConfig {
    int degree = 1;
    std::size_t n = 64;
    std::vector<std::size_t> n_list{16, 32, 64, 128, 256, 512, 1024};
    std::size_t n_ref = 4096;
    std::string quadrature = "trapezoid";
    std::string convention = "nodes";
};

struct ExperimentConfig {
    Time tau = 0;
    Time t = 0;
    Time T = 20;
    std::size_t depth = 15;
    std::size_t horizon = 60;
    double rho = 1.1;
    double tolerance = 1e-12;
    std::size_t max_iter = 10'000;
    std::string initial = "1";
    std::vector<std::string> seeds{"0.5"};
    std::vector<double> alphas;
    std::size_t trials = 200;
    double radius = 5.0;
};

struct RunConfig {
    ModelConfig model;
    DiscretizationConfig discretization;
    ExperimentConfig experiment;
    std::uint64_t rng_seed = 12345;
};

namespace detail {

inline std::string where(const YAML::Node& node, const std::string& field) {
    std::ostringstream os;
    os << "config field '" << field << "'";
    if (node.IsDefined() && node.Mark().line >= 0) os << " (line " << node.Mark().line + 1 << ")";
    return os.str();
}

template <typename T>
T read(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where(node, field) + ": cannot read value '" + YAML::Dump(node) + "'");
    }
}

template <typename T>
void read_into(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
    if (const YAML::Node n = parent[key]) out = read<T>(n, path + "." + key);
}

inline void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys) {
    if (!node.IsMap()) throw ConfigError(where(node, path) + ": expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw ConfigError(where(kv.first, path + "." + key) + ": unknown key");
    }
}

inline void check_expression(const std::string& text, const std::string& field, const std::string& allowed,
                             const YAML::Node& node) {
    Expression e;
    try {
        e = Expression::parse(text);
    } catch (const InputError& err) {
        throw ConfigError(where(node, field) + ": " + err.what());
    }
    for (char v : std::string("txy"))
        if (allowed.find(v) == std::string::npos && e.uses(v))
            throw ConfigError(where(node, field) + ": variable '" + std::string(1, v) + "' is not allowed here");
}

} // namespace detail

/// Parse a configuration document. Missing fields keep their defaults.
inline RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config parse error (line " + std::to_string(e.mark.line + 1) + "): " + e.msg);
    }
    RunConfig cfg;
    if (!root || root.IsNull()) return cfg;
    detail::check_keys(root, "", {"model", "discretization", "experiment", "rng_seed"});
    detail::read_into(root, "rng_seed", "", cfg.rng_seed);

    if (const YAML::Node m = root["model"]) {
        detail::check_keys(m, "model", {"habitat", "kernel", "growth", "inhomogeneity", "time"});
        if (const YAML::Node h = m["habitat"]) {
            const auto v = detail::read<std::vector<double>>(h, "model.habitat");
            if (v.size() != 2) throw ConfigError(detail::where(h, "model.habitat") + ": expected [a, b]");
            cfg.model.a = v[0];
            cfg.model.b = v[1];
            if (!(v[0] < v[1]) || !std::isfinite(v[0]) || !std::isfinite(v[1]))
                throw ConfigError(detail::where(h, "model.habitat") + ": need finite a < b");
        }
        if (const YAML::Node k = m["kernel"]) {
            detail::check_keys(k, "model.kernel", {"type", "dispersal", "expr", "k0"});
            auto& kc = cfg.model.kernel;
            detail::read_into(k, "type", "model.kernel", kc.type);
            detail::read_into(k, "dispersal", "model.kernel", kc.dispersal);
            detail::read_into(k, "expr", "model.kernel", kc.expr);
            if (k["k0"]) kc.k0 = detail::read<double>(k["k0"], "model.kernel.k0");
            if (kc.type == "laplace") {
                detail::check_expression(kc.dispersal, "model.kernel.dispersal", "t", k["dispersal"] ? k["dispersal"] : k);
            } else if (kc.type == "custom") {
                if (kc.expr.empty()) throw ConfigError(detail::where(k, "model.kernel.expr") + ": required for custom kernels");
                detail::check_expression(kc.expr, "model.kernel.expr", "txy", k["expr"]);
            } else {
                throw ConfigError(detail::where(k["type"], "model.kernel.type") + ": expected laplace or custom");
            }
        }
        if (const YAML::Node g = m["growth"]) {
            detail::check_keys(g, "model.growth", {"type", "alpha", "gamma", "gamma_limit", "c"});
            auto& gc = cfg.model.growth;
            detail::read_into(g, "type", "model.growth", gc.type);
            detail::read_into(g, "alpha", "model.growth", gc.alpha);
            if (g["gamma_limit"]) gc.gamma_limit = detail::read<double>(g["gamma_limit"], "model.growth.gamma_limit");
            detail::read_into(g, "c", "model.growth", gc.c);
            if (gc.type == "beverton-holt") {
                detail::read_into(g, "gamma", "model.growth", gc.gamma);
                if (!(gc.alpha > 0.0)) throw ConfigError(detail::where(g, "model.growth.alpha") + ": must be positive");
                detail::check_expression(gc.gamma, "model.growth.gamma", "tx", g["gamma"] ? g["gamma"] : g);
            } else if (gc.type == "ricker") {
                if (g["gamma"]) {
                    gc.gamma = detail::read<std::string>(g["gamma"], "model.growth.gamma");
                    detail::check_expression(gc.gamma, "model.growth.gamma", "t", g["gamma"]);
                    if (!gc.gamma_limit)
                        throw ConfigError(detail::where(g, "model.growth.gamma_limit") +
                                          ": required alongside an explicit Ricker gamma");
                } else {
                    gc.gamma.clear();
                    if (!gc.gamma_limit)
                        throw ConfigError(detail::where(g, "model.growth") + ": Ricker needs gamma or gamma_limit");
                }
            } else {
                throw ConfigError(detail::where(g["type"], "model.growth.type") + ": expected beverton-holt or ricker");
            }
        }
        if (const YAML::Node b = m["inhomogeneity"]) {
            cfg.model.inhomogeneity = detail::read<std::string>(b, "model.inhomogeneity");
            detail::check_expression(*cfg.model.inhomogeneity, "model.inhomogeneity", "x", b);
        }
        if (const YAML::Node t = m["time"]) {
            detail::check_keys(t, "model.time", {"first", "last"});
            if (t["first"]) cfg.model.first = detail::read<Time>(t["first"], "model.time.first");
            if (t["last"]) cfg.model.last = detail::read<Time>(t["last"], "model.time.last");
        }
        if (cfg.model.growth.type == "ricker" && !cfg.model.inhomogeneity) cfg.model.inhomogeneity = "0";
    }

    if (const YAML::Node d = root["discretization"]) {
        detail::check_keys(d, "discretization", {"degree", "n", "n_list", "n_ref", "quadrature", "convention"});
        auto& dc = cfg.discretization;
        detail::read_into(d, "degree", "discretization", dc.degree);
        detail::read_into(d, "n", "discretization", dc.n);
        detail::read_into(d, "n_list", "discretization", dc.n_list);
        detail::read_into(d, "n_ref", "discretization", dc.n_ref);
        detail::read_into(d, "quadrature", "discretization", dc.quadrature);
        detail::read_into(d, "convention", "discretization", dc.convention);
        if (dc.degree < 1 || dc.degree > 3)
            throw ConfigError(detail::where(d["degree"], "discretization.degree") + ": must be 1, 2 or 3");
        if (dc.quadrature != "trapezoid")
            throw ConfigError(detail::where(d["quadrature"], "discretization.quadrature") + ": only trapezoid is supported");
        if (dc.convention != "nodes" && dc.convention != "intervals")
            throw ConfigError(detail::where(d["convention"], "discretization.convention") + ": expected nodes or intervals");
        if (dc.n < 1) throw ConfigError(detail::where(d["n"], "discretization.n") + ": must be positive");
    }

    if (const YAML::Node e = root["experiment"]) {
        detail::check_keys(e, "experiment", {"tau", "t", "T", "depth", "horizon", "rho", "tolerance", "max_iter",
                                             "initial", "seeds", "alphas", "trials", "radius"});
        auto& ec = cfg.experiment;
        detail::read_into(e, "tau", "experiment", ec.tau);
        detail::read_into(e, "t", "experiment", ec.t);
        detail::read_into(e, "T", "experiment", ec.T);
        detail::read_into(e, "depth", "experiment", ec.depth);
        detail::read_into(e, "horizon", "experiment", ec.horizon);
        detail::read_into(e, "rho", "experiment", ec.rho);
        detail::read_into(e, "tolerance", "experiment", ec.tolerance);
        detail::read_into(e, "max_iter", "experiment", ec.max_iter);
        detail::read_into(e, "initial", "experiment", ec.initial);
        detail::read_into(e, "seeds", "experiment", ec.seeds);
        detail::read_into(e, "alphas", "experiment", ec.alphas);
        detail::read_into(e, "trials", "experiment", ec.trials);
        detail::read_into(e, "radius", "experiment", ec.radius);
        if (e["initial"]) detail::check_expression(ec.initial, "experiment.initial", "x", e["initial"]);
        if (e["seeds"]) {
            if (ec.seeds.empty()) throw ConfigError(detail::where(e["seeds"], "experiment.seeds") + ": empty list");
            for (std::size_t i = 0; i < ec.seeds.size(); ++i)
                detail::check_expression(ec.seeds[i], "experiment.seeds[" + std::to_string(i) + "]", "x",
                                         e["seeds"][i]);
        }
        if (!(ec.rho >= 1.0)) throw ConfigError(detail::where(e["rho"], "experiment.rho") + ": must be >= 1");
        if (!(ec.tolerance > 0.0)) throw ConfigError(detail::where(e["tolerance"], "experiment.tolerance") + ": must be positive");
        for (double a : ec.alphas)
            if (!(a > 0.0)) throw ConfigError(detail::where(e["alphas"], "experiment.alphas") + ": must be positive");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Effective configuration as YAML; parsing the output reproduces `cfg`.
inline std::string to_yaml(const RunConfig& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "habitat" << YAML::Value << YAML::Flow << YAML::BeginSeq << cfg.model.a << cfg.model.b
        << YAML::EndSeq;
    const auto& k = cfg.model.kernel;
    out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap << YAML::Key << "type" << YAML::Value << k.type;
    if (k.type == "laplace") out << YAML::Key << "dispersal" << YAML::Value << k.dispersal;
    else out << YAML::Key << "expr" << YAML::Value << k.expr;
    if (k.k0) out << YAML::Key << "k0" << YAML::Value << *k.k0;
    out << YAML::EndMap;
    const auto& g = cfg.model.growth;
    out << YAML::Key << "growth" << YAML::Value << YAML::BeginMap << YAML::Key << "type" << YAML::Value << g.type;
    if (g.type == "beverton-holt") {
        out << YAML::Key << "alpha" << YAML::Value << g.alpha << YAML::Key << "gamma" << YAML::Value << g.gamma;
    } else {
        if (!g.gamma.empty()) out << YAML::Key << "gamma" << YAML::Value << g.gamma;
        if (g.gamma_limit) out << YAML::Key << "gamma_limit" << YAML::Value << *g.gamma_limit;
        out << YAML::Key << "c" << YAML::Value << g.c;
    }
    out << YAML::EndMap;
    if (cfg.model.inhomogeneity) out << YAML::Key << "inhomogeneity" << YAML::Value << *cfg.model.inhomogeneity;
    if (cfg.model.first || cfg.model.last) {
        out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
        if (cfg.model.first) out << YAML::Key << "first" << YAML::Value << *cfg.model.first;
        if (cfg.model.last) out << YAML::Key << "last" << YAML::Value << *cfg.model.last;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& d = cfg.discretization;
    out << YAML::Key << "discretization" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "degree" << YAML::Value << d.degree << YAML::Key << "n" << YAML::Value << d.n;
    out << YAML::Key << "n_list" << YAML::Value << YAML::Flow << d.n_list;
    out << YAML::Key << "n_ref" << YAML::Value << d.n_ref << YAML::Key << "quadrature" << YAML::Value << d.quadrature;
    out << YAML::Key << "convention" << YAML::Value << d.convention << YAML::EndMap;

    const auto& e = cfg.experiment;
    out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tau" << YAML::Value << e.tau << YAML::Key << "t" << YAML::Value << e.t;
    out << YAML::Key << "T" << YAML::Value << e.T << YAML::Key << "depth" << YAML::Value << e.depth;
    out << YAML::Key << "horizon" << YAML::Value << e.horizon << YAML::Key << "rho" << YAML::Value << e.rho;
    out << YAML::Key << "tolerance" << YAML::Value << e.tolerance << YAML::Key << "max_iter" << YAML::Value << e.max_iter;
    out << YAML::Key << "initial" << YAML::Value << e.initial;
    out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << e.seeds;
    out << YAML::Key << "alphas" << YAML::Value << YAML::Flow << e.alphas;
    out << YAML::Key << "trials" << YAML::Value << e.trials << YAML::Key << "radius" << YAML::Value << e.radius;
    out << YAML::EndMap;
    out << YAML::Key << "rng_seed" << YAML::Value << cfg.rng_seed;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

/// Build the model described by the configuration. For Ricker growth,
/// `frozen` selects the autonomous limit gamma_t = gamma_limit.
inline IdeModel build_model(const ModelConfig& mc, bool frozen = false) {
    IdeModel m;
    m.habitat = {mc.a, mc.b};
    if (mc.kernel.type == "laplace") {
        const Expression delta = Expression::parse(mc.kernel.dispersal);
        m.kernel = LaplaceKernel{[delta](Time t) { return delta(static_cast<double>(t)); }};
    } else {
        const Expression k = Expression::parse(mc.kernel.expr);
        m.kernel = CustomKernel{[k](Time t, double x, double y) { return k(static_cast<double>(t), x, y); }, mc.kernel.k0};
    }
    if (mc.growth.type == "beverton-holt") {
        const Expression gamma = Expression::parse(mc.growth.gamma);
        m.growth = BevertonHolt{mc.growth.alpha, [gamma](Time t, double x) { return gamma(static_cast<double>(t), x); }};
    } else {
        const double limit = mc.growth.gamma_limit.value_or(0.0);
        if (frozen) {
            m.growth = Ricker{[limit](Time) { return limit; }};
        } else if (!mc.growth.gamma.empty()) {
            const Expression gamma = Expression::parse(mc.growth.gamma);
            m.growth = Ricker{[gamma](Time t) { return gamma(static_cast<double>(t)); }};
        } else {
            m.growth = Ricker{[](Time) { return 0.0; }};
            const double k0 = kernel_mass(m, mc.first.value_or(0), SupIntegralGrid::uniform(m.habitat));
            const double q = k0 * limit, c = mc.growth.c;
            m.growth = Ricker{[limit, c, q](Time t) { return limit * (1.0 + c * std::pow(q, static_cast<double>(t))); }};
        }
    }
    if (mc.inhomogeneity) {
        const Expression b = Expression::parse(*mc.inhomogeneity);
        m.inhomogeneity = [b](double x) { return b(0.0, x); };
    }
    if (mc.first) m.time_domain.first = *mc.first;
    if (mc.last) m.time_domain.last = *mc.last;
    m.validate();
    return m;
}

inline SpaceFn build_function(const std::string& text) {
    const Expression e = Expression::parse(text);
    return [e](double x) { return e(0.0, x); };
}

} // namespace idyn::cli
