// Run configuration: the knobs shared by the CLI commands, their defaults,
// and JSON (de)serialization for config files and run manifests.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace treegen {

inline constexpr const char* kArtifactName = "treegen";
inline constexpr const char* kArtifactVersion = "0.1.0";

struct Config {
    std::string grammar_path;
    std::string style = "hs";  // "hs" or "django"; picks the default M
    int m = 3;                 // retrieved neighbors: 3 (hs) / 10 (django)
    int n_max = 4;
    double lambda = 3.0;
    int beam = 15;
    int max_steps = 300;
    std::string agg = "sum";      // piece-boost aggregation: "sum" or "max"
    std::string scorer = "count"; // base scorer: "count" or "uniform"
    bool lowercase = false;
    std::optional<double> norm_constant;  // overrides the index's Ā when set
    uint64_t seed = 17;
    int jobs = 1;

    bool operator==(const Config&) const = default;
};

// Defaults for a dataset style: hs → M=3, django → M=10. Throws
// InvalidArgument for unknown styles.
Config default_config(const std::string& style);

nlohmann::ordered_json config_json(const Config& config);

// Applies the fields present in `j` on top of `base`; unknown keys are a data
// error.
Config config_from_json(const nlohmann::json& j, Config base = {});

// Reads a JSON config file on top of `base`.
Config load_config_file(const std::string& path, Config base = {});

}  // namespace treegen
