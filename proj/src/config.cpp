#include "treegen/config.hpp"

#include <fstream>

#include "treegen/errors.hpp"

namespace treegen {

Config default_config(const std::string& style) {
    Config config;
    config.style = style;
    if (style == "hs")
        config.m = 3;
    else if (style == "django")
        config.m = 10;
    else
        throw InvalidArgument("unknown style '" + style + "' (expected hs or django)");
    return config;
}

nlohmann::ordered_json config_json(const Config& config) {
    nlohmann::ordered_json j;
    j["grammar"] = config.grammar_path;
    j["style"] = config.style;
    j["m"] = config.m;
    j["n_max"] = config.n_max;
    j["lambda"] = config.lambda;
    j["beam"] = config.beam;
    j["max_steps"] = config.max_steps;
    j["agg"] = config.agg;
    j["scorer"] = config.scorer;
    j["lowercase"] = config.lowercase;
    if (config.norm_constant)
        j["norm_constant"] = *config.norm_constant;
    else
        j["norm_constant"] = nullptr;
    j["seed"] = config.seed;
    j["jobs"] = config.jobs;
    return j;
}

Config config_from_json(const nlohmann::json& j, Config base) {
    if (!j.is_object()) throw DataError("config must be a JSON object");
    try {
        // Style first: it rebinds the default M, which an explicit "m"
        // overrides.
        if (auto it = j.find("style"); it != j.end()) {
            Config styled = default_config(it->get<std::string>());
            base.style = styled.style;
            base.m = styled.m;
        }
        for (const auto& [key, value] : j.items()) {
            if (key == "style") continue;
            if (key == "grammar") base.grammar_path = value.get<std::string>();
            else if (key == "m") base.m = value.get<int>();
            else if (key == "n_max") base.n_max = value.get<int>();
            else if (key == "lambda") base.lambda = value.get<double>();
            else if (key == "beam") base.beam = value.get<int>();
            else if (key == "max_steps") base.max_steps = value.get<int>();
            else if (key == "agg") base.agg = value.get<std::string>();
            else if (key == "scorer") base.scorer = value.get<std::string>();
            else if (key == "lowercase") base.lowercase = value.get<bool>();
            else if (key == "norm_constant") {
                if (value.is_null()) base.norm_constant.reset();
                else base.norm_constant = value.get<double>();
            } else if (key == "seed") base.seed = value.get<uint64_t>();
            else if (key == "jobs") base.jobs = value.get<int>();
            else throw DataError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad config value: ") + e.what());
    }
    return base;
}

Config load_config_file(const std::string& path, Config base) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

}  // namespace treegen
