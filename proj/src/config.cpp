#include "mfgseg/config.hpp"

#include <fstream>

#include "json.hpp"

namespace mfgseg {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known) throw ConfigError(path + ": unknown key '" + item.key() + "'");
    }
}

double get_number(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
    if (!obj[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
    if (!obj[key].is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return obj[key].get<int>();
}

InteractionSpec parse_interaction(const json& obj, const std::string& path) {
    if (!obj.is_object() || !obj.contains("kind") || !obj["kind"].is_string())
        throw ConfigError(path + ": expected {kind, ...}");
    const std::string kind = obj["kind"].get<std::string>();
    try {
        if (kind == "linear") {
            check_keys(obj, path, {"kind", "gamma"});
            return InteractionSpec::linear(get_number(obj, path, "gamma"));
        }
        if (kind == "rational_perturbed") {
            check_keys(obj, path, {"kind", "gamma", "a", "b"});
            return InteractionSpec::rational_perturbed(get_number(obj, path, "gamma"), get_number(obj, path, "a"),
                                                       get_number(obj, path, "b"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ".kind: unknown interaction kind '" + kind + "'");
}

}  // namespace

InteractionPair RunConfig::pair() const {
    if (!g1 || !g2) throw ConfigError("interactions: section required for this command");
    return InteractionPair(*g1, *g2);
}

RunConfig parse_run_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(doc, "config", {"grid", "interactions", "nash", "variational", "branch", "diagnose", "output"});

    RunConfig config;

    if (doc.contains("grid")) {
        check_keys(doc["grid"], "grid", {"M"});
        config.grid_m = get_int(doc["grid"], "grid", "M");
        try {
            Grid probe(config.grid_m);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("grid.M: ") + e.what());
        }
    }

    if (doc.contains("interactions")) {
        check_keys(doc["interactions"], "interactions", {"g1", "g2"});
        if (!doc["interactions"].contains("g1") || !doc["interactions"].contains("g2"))
            throw ConfigError("interactions: both g1 and g2 are required");
        config.g1 = parse_interaction(doc["interactions"]["g1"], "interactions.g1");
        config.g2 = parse_interaction(doc["interactions"]["g2"], "interactions.g2");
        try {
            InteractionPair probe(*config.g1, *config.g2);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("interactions: ") + e.what());
        }
    }

    if (doc.contains("nash")) {
        const json& section = doc["nash"];
        check_keys(section, "nash", {"nu", "damping", "tol", "max_iters", "kick"});
        NashSection nash;
        nash.nu = get_number(section, "nash", "nu");
        if (!(nash.nu > 0.0)) throw ConfigError("nash.nu: must be positive");
        if (section.contains("damping")) nash.damping = get_number(section, "nash", "damping");
        if (!(nash.damping > 0.0 && nash.damping <= 1.0)) throw ConfigError("nash.damping: must lie in (0,1]");
        if (section.contains("tol")) nash.tol = get_number(section, "nash", "tol");
        if (!(nash.tol > 0.0)) throw ConfigError("nash.tol: must be positive");
        if (section.contains("max_iters")) nash.max_iters = get_int(section, "nash", "max_iters");
        if (nash.max_iters < 1) throw ConfigError("nash.max_iters: must be at least 1");
        if (section.contains("kick")) {
            check_keys(section["kick"], "nash.kick", {"mode", "amplitude"});
            Kick kick;
            kick.mode = get_int(section["kick"], "nash.kick", "mode");
            kick.amplitude = get_number(section["kick"], "nash.kick", "amplitude");
            if (kick.mode < 1) throw ConfigError("nash.kick.mode: must be at least 1");
            nash.kick = kick;
        }
        config.nash = nash;
    }

    if (doc.contains("variational")) {
        const json& section = doc["variational"];
        check_keys(section, "variational", {"gamma1", "gamma2", "beta", "beta_list"});
        VariationalSection var;
        var.gamma1 = get_number(section, "variational", "gamma1");
        var.gamma2 = get_number(section, "variational", "gamma2");
        if (!(var.gamma1 > 0.0 && var.gamma2 > 0.0)) throw ConfigError("variational: gammas must be positive");
        if (section.contains("beta") == section.contains("beta_list"))
            throw ConfigError("variational: give exactly one of beta, beta_list");
        if (section.contains("beta")) {
            var.betas.push_back(get_number(section, "variational", "beta"));
        } else {
            if (!section["beta_list"].is_array() || section["beta_list"].empty())
                throw ConfigError("variational.beta_list: expected a non-empty array");
            for (const auto& value : section["beta_list"]) {
                if (!value.is_number()) throw ConfigError("variational.beta_list: expected numbers");
                var.betas.push_back(value.get<double>());
            }
            for (size_t i = 1; i < var.betas.size(); ++i)
                if (!(var.betas[i] > var.betas[i - 1]))
                    throw ConfigError("variational.beta_list: must be strictly increasing");
        }
        for (double beta : var.betas)
            if (!(beta > 0.0)) throw ConfigError("variational: beta values must be positive");
        config.variational = var;
    }

    if (doc.contains("branch")) {
        const json& section = doc["branch"];
        check_keys(section, "branch", {"k", "target_nu_min", "step"});
        BranchSection branch;
        if (!section.contains("k")) throw ConfigError("branch: missing key 'k'");
        if (section["k"].is_array()) {
            for (const auto& value : section["k"]) {
                if (!value.is_number_integer()) throw ConfigError("branch.k: expected integers");
                branch.ks.push_back(value.get<int>());
            }
        } else {
            branch.ks.push_back(get_int(section, "branch", "k"));
        }
        if (branch.ks.empty()) throw ConfigError("branch.k: expected at least one index");
        for (int k : branch.ks)
            if (k < 1) throw ConfigError("branch.k: indices must be at least 1");
        branch.target_nu_min = get_number(section, "branch", "target_nu_min");
        if (!(branch.target_nu_min > 0.0)) throw ConfigError("branch.target_nu_min: must be positive");
        if (section.contains("step")) {
            const json& step = section["step"];
            check_keys(step, "branch.step", {"ds0", "ds_min", "ds_max", "grow", "eps0", "beta_cap", "max_steps"});
            if (step.contains("ds0")) branch.step.ds0 = get_number(step, "branch.step", "ds0");
            if (step.contains("ds_min")) branch.step.ds_min = get_number(step, "branch.step", "ds_min");
            if (step.contains("ds_max")) branch.step.ds_max = get_number(step, "branch.step", "ds_max");
            if (step.contains("grow")) branch.step.grow = get_number(step, "branch.step", "grow");
            if (step.contains("eps0")) branch.step.eps0 = get_number(step, "branch.step", "eps0");
            if (step.contains("beta_cap")) branch.step.beta_cap = get_number(step, "branch.step", "beta_cap");
            if (step.contains("max_steps")) branch.step.max_steps = get_int(step, "branch.step", "max_steps");
            if (!(branch.step.ds0 > 0.0 && branch.step.ds_min > 0.0 && branch.step.ds_max >= branch.step.ds0 &&
                  branch.step.grow >= 1.0 && branch.step.eps0 > 0.0 && branch.step.max_steps > 0))
                throw ConfigError("branch.step: inconsistent step policy");
        }
        config.branch = branch;
    }

    if (doc.contains("diagnose")) {
        check_keys(doc["diagnose"], "diagnose", {"input"});
        if (!doc["diagnose"].contains("input") || !doc["diagnose"]["input"].is_string())
            throw ConfigError("diagnose.input: expected a path string");
        config.diagnose = DiagnoseSection{doc["diagnose"]["input"].get<std::string>()};
    }

    if (doc.contains("output")) {
        const json& section = doc["output"];
        check_keys(section, "output", {"directory", "formats"});
        if (section.contains("directory")) {
            if (!section["directory"].is_string()) throw ConfigError("output.directory: expected a string");
            config.output.directory = section["directory"].get<std::string>();
        }
        if (section.contains("formats")) {
            if (!section["formats"].is_array()) throw ConfigError("output.formats: expected an array");
            config.output.csv = false;
            config.output.json = false;
            for (const auto& value : section["formats"]) {
                const std::string fmt = value.is_string() ? value.get<std::string>() : "";
                if (fmt == "csv")
                    config.output.csv = true;
                else if (fmt == "json")
                    config.output.json = true;
                else
                    throw ConfigError("output.formats: entries must be 'csv' or 'json'");
            }
            if (!config.output.csv && !config.output.json) throw ConfigError("output.formats: empty selection");
        }
    }

    return config;
}

RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config_text(text);
}

}  // namespace mfgseg
