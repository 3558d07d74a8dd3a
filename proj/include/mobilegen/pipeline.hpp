#pragma once

#include "mobilegen/config.hpp"
#include "mobilegen/dataset.hpp"
#include "mobilegen/distribution.hpp"
#include "mobilegen/environment.hpp"
#include "mobilegen/model_client.hpp"
#include "mobilegen/profiling.hpp"
#include "mobilegen/quality.hpp"
#include "mobilegen/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mobilegen {

namespace fs = std::filesystem;

// mock -> offline scenario agent; http -> OpenAI-compatible endpoint, with
// empty config fields taken from the MOBILEGEN_MODEL_* environment variables.
std::unique_ptr<ChatClient> make_client(const ModelConfig& cfg);

std::vector<AppGraph> load_apps(const fs::path& dir);

// Bootstrap grid for the prior dataset: three structural levels (depth 10-15,
// 16-25, 26-35 with breadth 1, 2, 3) crossed with the three interaction
// levels, n_per_cell trajectories per cell. Understanding difficulty and app
// sets are drawn uniformly. Needs at least three apps.
std::vector<DifficultyParams> build_prior_plan(int n_per_cell, const std::vector<std::string>& apps,
                                               std::uint64_t seed);

struct IdParams {
    std::string id;
    DifficultyParams params;
};

std::string trajectory_id(const std::string& prefix, std::size_t index);

void write_params_jsonl(const fs::path& path, const std::vector<IdParams>& items);
std::vector<IdParams> read_params_jsonl(const fs::path& path);

// Per-trajectory outcome of a stage.
struct ItemStatus {
    std::string id;
    std::string status;  // complete | incomplete | failed | synthesized | unsynthesized | constraint_violated
    std::string message;
    int rollbacks = 0;

    friend bool operator==(const ItemStatus&, const ItemStatus&) = default;
};

void write_status_jsonl(const fs::path& path, const std::vector<ItemStatus>& items);
std::vector<ItemStatus> read_status_jsonl(const fs::path& path);

using Progress = std::function<void(const std::string&)>;

// Runs the generator for every item; only complete trajectories are written
// (to out_dir/<id>). Statuses come back in input order.
std::vector<ItemStatus> generate_stage(const std::vector<IdParams>& items, const std::vector<AppGraph>& apps,
                                       ChatClient& model, const GenerationConfig& cfg, int workers,
                                       const fs::path& out_dir, const Progress& progress = {});

// Adds step thoughts and the task instruction to the records under raw_dir
// (all of them, or the ids in `only`) and writes the finished ones to out_dir/<id>.
std::vector<ItemStatus> synthesize_stage(const fs::path& raw_dir, const fs::path& out_dir, ChatClient& model,
                                         const GenerationConfig& cfg, int workers,
                                         const std::vector<std::string>* only = nullptr,
                                         const Progress& progress = {});

// Builds the student inputs for every step of every record under prior_dir.
std::vector<PriorStep> load_prior_steps(const fs::path& prior_dir, bool with_images = true);

// Generates and synthesizes the bootstrap prior dataset into prior_dir.
void bootstrap_prior(const fs::path& prior_dir, const std::vector<AppGraph>& apps, ChatClient& model,
                     const Config& cfg, const Progress& progress = {});

CapabilityProfile profile_stage(const fs::path& prior_dir, ChatClient& student, const ProfilingConfig& cfg,
                                const MatchConfig& match, std::vector<StepOutcome>* outcomes = nullptr);

std::vector<IdParams> sample_stage(const Plan& plan, int n, std::uint64_t seed, std::size_t first_index = 0);

// Scores every step and the whole trajectory, stores the scores in each
// trajectory.json and returns the reports (kept set with `threshold`).
std::vector<QualityReport> judge_stage(const fs::path& data_dir, ChatClient& judge, const QualityConfig& cfg,
                                       int workers, const std::vector<std::string>* only = nullptr,
                                       const Progress& progress = {});

void write_reports_jsonl(const fs::path& path, const std::vector<QualityReport>& reports);
std::vector<QualityReport> read_reports_jsonl(const fs::path& path);

std::vector<std::string> read_lines(const fs::path& path);
void write_lines(const fs::path& path, const std::vector<std::string>& lines);

struct StageRecord {
    std::string name;
    std::string status;  // completed | cached | failed
    std::string artifact;
    std::string message;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    int requested = 0;
    int generated = 0;
    std::vector<StageRecord> stages;
    std::vector<ItemStatus> trajectories;
    std::vector<std::string> kept;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);

std::string config_hash(const Config& cfg);

// Full pipeline under cfg.run_dir. A stage whose artifact already exists is
// reused, so an interrupted run resumes where it stopped; deleting an
// artifact re-runs that stage and everything after it. A failing stage is
// recorded in the manifest before the error propagates.
RunManifest run_pipeline(const Config& cfg, const Progress& progress = {});

}  // namespace mobilegen
