#pragma once

#include <json.hpp>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/experiments.hpp"
#include "shapereg/synth.hpp"

namespace shapereg {

// JSON config schema (version 1) shared by the CLI and tests. Sections:
// problem, method, experiment, output. Unknown keys are rejected at every
// level so that typos fail loudly instead of silently using defaults.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfg {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

inline GKind g_from_name(const std::string& s) {
    if (s == "linear_sum") return GKind::LinearSum;
    if (s == "additive_sine") return GKind::AdditiveSine;
    if (s == "max_affine") return GKind::MaxAffine;
    if (s == "constant") return GKind::Constant;
    throw ConfigError("config: unknown g '" + s + "'");
}

inline const char* g_name(GKind g) {
    switch (g) {
    case GKind::LinearSum: return "linear_sum";
    case GKind::AdditiveSine: return "additive_sine";
    case GKind::MaxAffine: return "max_affine";
    case GKind::Constant: return "constant";
    }
    return "?";
}

inline NoiseKind noise_from_name(const std::string& s) {
    if (s == "gaussian") return NoiseKind::Gaussian;
    if (s == "bounded_uniform") return NoiseKind::BoundedUniform;
    if (s == "hetero_gaussian") return NoiseKind::HeteroGaussian;
    throw ConfigError("config: unknown noise '" + s + "'");
}

inline const char* noise_name(NoiseKind k) {
    switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::BoundedUniform: return "bounded_uniform";
    case NoiseKind::HeteroGaussian: return "hetero_gaussian";
    }
    return "?";
}

inline XLaw xlaw_from_name(const std::string& s) {
    if (s == "uniform01") return XLaw::Uniform01;
    if (s == "floored_mixture") return XLaw::FlooredMixture;
    throw ConfigError("config: unknown x_law '" + s + "'");
}

inline const char* xlaw_name(XLaw l) {
    return l == XLaw::Uniform01 ? "uniform01" : "floored_mixture";
}

inline Method method_from_name(const std::string& s) {
    if (s == "fixed_partition" || s == "global_mean") return Method::FixedPartition;
    if (s == "knn") return Method::KNN;
    if (s == "proto_nn") return Method::ProtoNN;
    if (s == "optinet") return Method::OptiNet;
    if (s == "cart_like") return Method::CartLike;
    if (s == "centered_tree") return Method::CenteredTree;
    if (s == "uniform_tree") return Method::UniformTree;
    if (s == "mondrian") return Method::Mondrian;
    throw ConfigError("config: unknown method '" + s + "'");
}

inline HyperParam hyper_from_json(const nlohmann::json& j) {
    HyperParam h;
    if (j.is_string()) h.rule = j.get<std::string>();
    else if (j.is_number()) h.value = j.get<double>();
    else throw ConfigError("config: hyperparameter must be a number or rule name");
    return h;
}

} // namespace cfg

inline RegressionProblem problem_from_json(const nlohmann::json& j) {
    cfg::check_keys(j, {"d", "g", "g_param", "noise", "noise_param", "x_law", "x_law_param"},
                    "problem");
    RegressionProblem p;
    p.d = j.at("d").get<int>();
    p.g = cfg::g_from_name(j.at("g").get<std::string>());
    if (j.contains("g_param")) p.g_param = j.at("g_param").get<double>();
    if (j.contains("noise")) p.noise = cfg::noise_from_name(j.at("noise").get<std::string>());
    if (j.contains("noise_param")) p.noise_param = j.at("noise_param").get<double>();
    if (j.contains("x_law")) p.x_law = cfg::xlaw_from_name(j.at("x_law").get<std::string>());
    if (j.contains("x_law_param")) p.x_law_param = j.at("x_law_param").get<double>();
    if (p.d < 1) throw ConfigError("config: problem.d must be >= 1");
    return p;
}

inline nlohmann::json problem_to_json(const RegressionProblem& p) {
    return {{"d", p.d},
            {"g", cfg::g_name(p.g)},
            {"g_param", p.g_param},
            {"noise", cfg::noise_name(p.noise)},
            {"noise_param", p.noise_param},
            {"x_law", cfg::xlaw_name(p.x_law)},
            {"x_law_param", p.x_law_param}};
}

inline MethodSpec method_from_json(const nlohmann::json& j) {
    cfg::check_keys(j,
                    {"name", "k", "m", "beta", "cuts", "eta", "levels", "lifetime",
                     "prototype_law", "prototype_law_param"},
                    "method");
    MethodSpec spec;
    const std::string name = j.at("name").get<std::string>();
    spec.method = cfg::method_from_name(name);
    if (name == "global_mean") spec.cuts = HyperParam{0.0, ""};
    if (j.contains("k")) spec.k = cfg::hyper_from_json(j.at("k"));
    if (j.contains("m")) spec.m = cfg::hyper_from_json(j.at("m"));
    if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
    if (j.contains("cuts")) spec.cuts = cfg::hyper_from_json(j.at("cuts"));
    if (j.contains("eta")) spec.eta = cfg::hyper_from_json(j.at("eta"));
    if (j.contains("levels")) spec.levels = cfg::hyper_from_json(j.at("levels"));
    if (j.contains("lifetime")) spec.lifetime = cfg::hyper_from_json(j.at("lifetime"));
    if (j.contains("prototype_law")) {
        spec.prototype_law.law = cfg::xlaw_from_name(j.at("prototype_law").get<std::string>());
        spec.prototype_law_set = true;
    }
    if (j.contains("prototype_law_param"))
        spec.prototype_law.param = j.at("prototype_law_param").get<double>();
    return spec;
}

/// Parsed experiment section. kind selects which harness runs; unrelated
/// fields stay at their defaults.
struct ExperimentSection {
    std::string kind = "rate";
    std::vector<std::size_t> n_grid;
    std::size_t n = 0;
    int replicates = 1;
    std::uint64_t seed = 1;
    double delta = 0.1;
    EvalSpec eval;
    std::string tree = "uniform"; ///< verify_volume_invariance / verify_aspect
    int n_splits = 8;
    std::string tail_kind = "uniform_vol";
    double parameter = 0.5;
    double lifetime = 10.0;
    double sigma = 1.0; ///< counterexample noise level
    int cells_per_dim = 4;
    int d = 2; ///< verification kinds that run without a problem section
};

inline ExperimentSection experiment_from_json(const nlohmann::json& j) {
    cfg::check_keys(j,
                    {"kind", "n", "n_grid", "replicates", "seed", "delta", "eval", "tree", "N",
                     "tail_kind", "parameter", "lifetime", "sigma", "cells_per_dim", "d"},
                    "experiment");
    ExperimentSection e;
    if (j.contains("kind")) e.kind = j.at("kind").get<std::string>();
    if (j.contains("n")) e.n = j.at("n").get<std::size_t>();
    if (j.contains("n_grid")) e.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("replicates")) e.replicates = j.at("replicates").get<int>();
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("delta")) e.delta = j.at("delta").get<double>();
    if (j.contains("eval")) {
        cfg::check_keys(j.at("eval"), {"type", "x0"}, "experiment.eval");
        const std::string t = j.at("eval").at("type").get<std::string>();
        if (t == "supnorm") e.eval.kind = EvalKind::SupNorm;
        else if (t == "pointwise") {
            e.eval.kind = EvalKind::Pointwise;
            e.eval.x0 = j.at("eval").at("x0").get<std::vector<double>>();
        } else throw ConfigError("config: unknown eval type '" + t + "'");
    }
    if (j.contains("tree")) e.tree = j.at("tree").get<std::string>();
    if (j.contains("N")) e.n_splits = j.at("N").get<int>();
    if (j.contains("tail_kind")) e.tail_kind = j.at("tail_kind").get<std::string>();
    if (j.contains("parameter")) e.parameter = j.at("parameter").get<double>();
    if (j.contains("lifetime")) e.lifetime = j.at("lifetime").get<double>();
    if (j.contains("sigma")) e.sigma = j.at("sigma").get<double>();
    if (j.contains("cells_per_dim")) e.cells_per_dim = j.at("cells_per_dim").get<int>();
    if (j.contains("d")) e.d = j.at("d").get<int>();
    return e;
}

struct OutputSection {
    bool timing = false; ///< populate wall_time_ms in records.csv (breaks byte-stability)
};

inline OutputSection output_from_json(const nlohmann::json& j) {
    cfg::check_keys(j, {"timing"}, "output");
    OutputSection o;
    if (j.contains("timing")) o.timing = j.at("timing").get<bool>();
    return o;
}

/// Full parsed config file.
struct Config {
    int schema = 1;
    bool has_problem = false;
    RegressionProblem problem;
    bool has_method = false;
    MethodSpec method;
    ExperimentSection experiment;
    OutputSection output;
};

inline Config config_from_json(const nlohmann::json& j) {
    cfg::check_keys(j, {"schema", "problem", "method", "experiment", "output"}, "top level");
    Config c;
    if (!j.contains("schema")) throw ConfigError("config: missing schema version");
    c.schema = j.at("schema").get<int>();
    if (c.schema != 1) throw ConfigError("config: unsupported schema version");
    if (j.contains("problem")) {
        c.problem = problem_from_json(j.at("problem"));
        c.has_problem = true;
    }
    if (j.contains("method")) {
        c.method = method_from_json(j.at("method"));
        c.has_method = true;
    }
    if (j.contains("experiment")) c.experiment = experiment_from_json(j.at("experiment"));
    if (j.contains("output")) c.output = output_from_json(j.at("output"));
    return c;
}

} // namespace shapereg
