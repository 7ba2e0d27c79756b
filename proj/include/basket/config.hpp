#pragma once

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "basket/model.hpp"
#include "basket/montecarlo.hpp"
#include "basket/pide.hpp"

namespace basket {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputConfig {
    std::string csv_path;
    bool plots = false;
};

struct RunConfig {
    BasketModel model;
    double strike = 0.0;
    std::vector<double> maturities;
    McConfig mc;
    GridOverrides pide;
    OutputConfig output;
    nlohmann::json resolved;  // full configuration with defaults applied
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known)
            throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
}

inline const json& require_key(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError("config: missing key '" + std::string(key) + "' in " + where);
    return *it;
}

inline double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("config: " + where + " must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback,
                        const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return as_number(*it, where + "." + key);
}

inline bool bool_or(const json& obj, const char* key, bool fallback, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ConfigError("config: " + where + "." + key + " must be a boolean");
    return it->get<bool>();
}

inline JumpSpec parse_jump(const json& j) {
    if (!j.is_object()) throw ConfigError("config: model.jump must be an object");
    const std::string type = require_key(j, "type", "model.jump").get<std::string>();
    if (type == "normal") {
        reject_unknown_keys(j, {"type", "eta", "gamma"}, "model.jump");
        return JumpSpec::normal(as_number(require_key(j, "eta", "model.jump"), "model.jump.eta"),
                                as_number(require_key(j, "gamma", "model.jump"), "model.jump.gamma"));
    }
    if (type == "constant") {
        reject_unknown_keys(j, {"type", "y"}, "model.jump");
        return JumpSpec::constant(as_number(require_key(j, "y", "model.jump"), "model.jump.y"));
    }
    throw ConfigError("config: model.jump.type must be 'normal' or 'constant'");
}

inline BasketModel parse_model(const json& j) {
    if (!j.is_object()) throw ConfigError("config: model must be an object");
    reject_unknown_keys(j, {"assets", "weights", "rho", "jump", "lambda", "r"}, "model");

    const json& assets = require_key(j, "assets", "model");
    if (!assets.is_array() || assets.empty())
        throw ConfigError("config: model.assets must be a non-empty array");

    BasketModel model;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const json& asset = assets[i];
        const std::string where = "model.assets[" + std::to_string(i) + "]";
        if (!asset.is_object()) throw ConfigError("config: " + where + " must be an object");
        reject_unknown_keys(asset, {"s0", "alpha", "beta"}, where);
        model.spots.push_back(as_number(require_key(asset, "s0", where), where + ".s0"));
        const double alpha = as_number(require_key(asset, "alpha", where), where + ".alpha");
        const double beta = as_number(require_key(asset, "beta", where), where + ".beta");
        try {
            model.vols.emplace_back(alpha, beta);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config: " + where + ": " + e.what());
        }
    }

    const std::size_t n = model.spots.size();
    if (const auto it = j.find("weights"); it != j.end()) {
        if (!it->is_array() || it->size() != n)
            throw ConfigError("config: model.weights must be an array of length " +
                              std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
            model.weights.push_back(as_number((*it)[i], "model.weights[" + std::to_string(i) + "]"));
    } else {
        model.weights.assign(n, 1.0 / static_cast<double>(n));
    }

    const json& rho = require_key(j, "rho", "model");
    if (rho.is_number()) {
        const double value = rho.get<double>();
        model.corr.assign(n, std::vector<double>(n, value));
        for (std::size_t i = 0; i < n; ++i) model.corr[i][i] = 1.0;
    } else if (rho.is_array()) {
        if (rho.size() != n) throw ConfigError("config: model.rho matrix must be " +
                                               std::to_string(n) + "x" + std::to_string(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (!rho[i].is_array() || rho[i].size() != n)
                throw ConfigError("config: model.rho matrix must be " + std::to_string(n) + "x" +
                                  std::to_string(n));
            std::vector<double> row;
            for (std::size_t k = 0; k < n; ++k)
                row.push_back(as_number(rho[i][k], "model.rho[" + std::to_string(i) + "][" +
                                                       std::to_string(k) + "]"));
            model.corr.push_back(std::move(row));
        }
    } else {
        throw ConfigError("config: model.rho must be a scalar or a square matrix");
    }

    try {
        model.jump = parse_jump(require_key(j, "jump", "model"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: model.jump: ") + e.what());
    }
    model.lambda = as_number(require_key(j, "lambda", "model"), "model.lambda");
    model.rate = number_or(j, "r", 0.0, "model");

    try {
        validate(model);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    return model;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
    using detail::as_number;
    using detail::require_key;

    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown_keys(root, {"schema_version", "model", "option", "mc", "pide", "output"},
                                "the top level");
    const auto version = require_key(root, "schema_version", "the top level");
    if (!version.is_number_integer() || version.get<int>() != 1)
        throw ConfigError("config: schema_version must be the integer 1");

    RunConfig cfg;
    cfg.model = detail::parse_model(require_key(root, "model", "the top level"));

    const nlohmann::json& option = require_key(root, "option", "the top level");
    if (!option.is_object()) throw ConfigError("config: option must be an object");
    detail::reject_unknown_keys(option, {"strike", "maturity"}, "option");
    cfg.strike = as_number(require_key(option, "strike", "option"), "option.strike");
    if (!(cfg.strike > 0.0)) throw ConfigError("config: option.strike must be > 0");
    const nlohmann::json& maturity = require_key(option, "maturity", "option");
    if (maturity.is_number()) {
        cfg.maturities.push_back(maturity.get<double>());
    } else if (maturity.is_array() && !maturity.empty()) {
        for (std::size_t i = 0; i < maturity.size(); ++i)
            cfg.maturities.push_back(
                as_number(maturity[i], "option.maturity[" + std::to_string(i) + "]"));
    } else {
        throw ConfigError("config: option.maturity must be a number or a non-empty array");
    }
    for (double t : cfg.maturities)
        if (!(t > 0.0)) throw ConfigError("config: option.maturity entries must be > 0");

    if (const auto it = root.find("mc"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config: mc must be an object");
        detail::reject_unknown_keys(
            *it, {"paths", "batches", "steps_per_year", "seed", "control_variate",
                  "regression_cv", "parallel_batches"},
            "mc");
        cfg.mc.paths = static_cast<long>(detail::number_or(*it, "paths", double(cfg.mc.paths), "mc"));
        cfg.mc.batches =
            static_cast<int>(detail::number_or(*it, "batches", double(cfg.mc.batches), "mc"));
        cfg.mc.steps_per_year = static_cast<int>(
            detail::number_or(*it, "steps_per_year", double(cfg.mc.steps_per_year), "mc"));
        if (const auto seed = it->find("seed"); seed != it->end()) {
            if (!seed->is_number_unsigned() && !seed->is_number_integer())
                throw ConfigError("config: mc.seed must be an integer");
            cfg.mc.seed = seed->get<std::uint64_t>();
        }
        cfg.mc.use_control_variate =
            detail::bool_or(*it, "control_variate", cfg.mc.use_control_variate, "mc");
        cfg.mc.regression_coefficient =
            detail::bool_or(*it, "regression_cv", cfg.mc.regression_coefficient, "mc");
        cfg.mc.parallel_batches =
            detail::bool_or(*it, "parallel_batches", cfg.mc.parallel_batches, "mc");
        if (cfg.mc.paths < 1 || cfg.mc.batches < 1 || cfg.mc.steps_per_year < 1)
            throw ConfigError("config: mc.paths, mc.batches and mc.steps_per_year must be >= 1");
    }

    if (const auto it = root.find("pide"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config: pide must be an object");
        detail::reject_unknown_keys(*it, {"dt", "dx", "x_max", "layer_stride"}, "pide");
        if (it->contains("dt")) cfg.pide.dt = as_number((*it)["dt"], "pide.dt");
        if (it->contains("dx")) cfg.pide.dx = as_number((*it)["dx"], "pide.dx");
        if (it->contains("x_max")) cfg.pide.x_max = as_number((*it)["x_max"], "pide.x_max");
        cfg.pide.layer_stride =
            static_cast<int>(detail::number_or(*it, "layer_stride", 0.0, "pide"));
    }

    if (const auto it = root.find("output"); it != root.end()) {
        if (!it->is_object()) throw ConfigError("config: output must be an object");
        detail::reject_unknown_keys(*it, {"csv", "plots"}, "output");
        if (it->contains("csv")) {
            if (!(*it)["csv"].is_string()) throw ConfigError("config: output.csv must be a string");
            cfg.output.csv_path = (*it)["csv"].get<std::string>();
        }
        cfg.output.plots = detail::bool_or(*it, "plots", false, "output");
    }

    // echo of the fully resolved configuration, defaults included
    nlohmann::json model_echo;
    for (std::size_t i = 0; i < cfg.model.n(); ++i)
        model_echo["assets"].push_back({{"s0", cfg.model.spots[i]},
                                        {"alpha", cfg.model.vols[i].alpha()},
                                        {"beta", cfg.model.vols[i].beta()}});
    model_echo["weights"] = cfg.model.weights;
    model_echo["rho"] = cfg.model.corr;
    if (cfg.model.jump.is_constant())
        model_echo["jump"] = {{"type", "constant"}, {"y", cfg.model.jump.eta()}};
    else
        model_echo["jump"] = {{"type", "normal"},
                              {"eta", cfg.model.jump.eta()},
                              {"gamma", cfg.model.jump.gamma()}};
    model_echo["lambda"] = cfg.model.lambda;
    model_echo["r"] = cfg.model.rate;
    model_echo["m"] = cfg.model.jump.mean_relative_jump();

    cfg.resolved = {{"schema_version", 1},
                    {"model", model_echo},
                    {"option", {{"strike", cfg.strike}, {"maturity", cfg.maturities}}},
                    {"mc",
                     {{"paths", cfg.mc.paths},
                      {"batches", cfg.mc.batches},
                      {"steps_per_year", cfg.mc.steps_per_year},
                      {"seed", cfg.mc.seed},
                      {"control_variate", cfg.mc.use_control_variate},
                      {"regression_cv", cfg.mc.regression_coefficient},
                      {"parallel_batches", cfg.mc.parallel_batches}}},
                    {"output", {{"csv", cfg.output.csv_path}, {"plots", cfg.output.plots}}}};
    nlohmann::json pide_echo = nlohmann::json::object();
    if (cfg.pide.dt) pide_echo["dt"] = *cfg.pide.dt;
    if (cfg.pide.dx) pide_echo["dx"] = *cfg.pide.dx;
    if (cfg.pide.x_max) pide_echo["x_max"] = *cfg.pide.x_max;
    pide_echo["layer_stride"] = cfg.pide.layer_stride;
    cfg.resolved["pide"] = pide_echo;
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_run_config(root);
}

}  // namespace basket
