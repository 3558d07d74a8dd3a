#pragma once

#include "mobilegen/distribution.hpp"
#include "mobilegen/matching.hpp"
#include "mobilegen/mcg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace mobilegen {

struct ProfilingConfig {
    int k = 3;
    double temperature = 0.2;
    int concurrency = 4;
    std::string prior_dir;   // empty: bootstrap a prior dataset under the run directory
    int prior_per_cell = 2;  // cells of the bootstrap grid

    friend bool operator==(const ProfilingConfig&, const ProfilingConfig&) = default;
};

struct GenerationConfig {
    double temperature = 0.0;
    int gamma = 3;
    double penalty = 0.3;
    int cycle_window = 6;
    int max_rollbacks = 3;
    int history_words = 80;
    int action_words = 20;
    int explorer_retries = 2;
    bool attach_screenshots = true;

    friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;

    McgConfig mcg() const;
};

struct QualityConfig {
    int threshold = 8;
    int screenshots = 4;

    friend bool operator==(const QualityConfig&, const QualityConfig&) = default;
};

struct ModelConfig {
    std::string backend = "mock";  // mock | http
    std::string endpoint;           // http only; MOBILEGEN_MODEL_ENDPOINT overrides when empty
    std::string model;
    int timeout_ms = 60000;
    int max_retries = 4;
    int max_in_flight = 8;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct Config {
    std::uint64_t seed = 7;
    int n = 50;
    int workers = 4;
    std::string run_dir = "run";
    std::string apps_dir = "apps";
    // Keep generating in batches until this many trajectories survive the
    // filter (0 disables), never exceeding max_generated in total.
    int target_kept = 0;
    int max_generated = 0;

    ChallengeConfig challenge;
    ProfilingConfig profiling;
    GenerationConfig generation;
    MatchConfig matching;
    QualityConfig quality;
    ModelConfig model;

    // Directory the relative paths resolve against; not serialized.
    std::filesystem::path base_dir;

    void validate() const;
    std::filesystem::path resolve(const std::string& p) const;
};

bool operator==(const Config& a, const Config& b);

// Missing keys keep their defaults; unknown keys and bad values raise InvalidConfig.
Config parse_config(std::string_view toml_text);
Config load_config(const std::filesystem::path& path);
std::string render_config(const Config& cfg);

}  // namespace mobilegen
