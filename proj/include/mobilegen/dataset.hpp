#pragma once

#include "mobilegen/environment.hpp"
#include "mobilegen/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mobilegen {

namespace fs = std::filesystem;

// A trajectory with the observations it was recorded on.
struct TrajectoryRecord {
    Trajectory trajectory;
    std::vector<Observation> before;  // one per step
    Observation final_observation;

    const Observation& after(std::size_t step_pos) const
    {
        return step_pos + 1 < before.size() ? before[step_pos + 1] : final_observation;
    }
};

std::string read_file(const fs::path& path);
// Writes through a temporary file and renames, so readers never see partial files.
void write_file(const fs::path& path, std::string_view bytes);

// <dir>/trajectory.json, screens/<step>.png, screens/<step>.som.png,
// ui/<step>.json, plus screens/final.png and ui/final.json for the end state.
// Fills in the observation references of every step.
void write_record(const fs::path& dir, TrajectoryRecord& record, bool render_images = true);
TrajectoryRecord read_record(const fs::path& dir);

// Rewrites only trajectory.json (after synthesis or judging).
void write_trajectory_json(const fs::path& dir, const Trajectory& t);

// Sorted subdirectories that contain a trajectory.json.
std::vector<fs::path> list_records(const fs::path& root);

struct DatasetStats {
    std::size_t trajectories = 0;
    std::map<std::string, int> app_frequency;  // trajectories per app
    std::map<int, int> dot;                     // sampled depth
    std::map<int, int> steps;                   // recorded step count
    std::map<int, int> bot;
    std::map<std::string, int> icd;
    std::map<std::string, int> iud;

    friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats compute_stats(const std::vector<Trajectory>& trajectories);
// Throws EmptyDataset when the directory holds no trajectories.
DatasetStats export_stats(const fs::path& dataset_dir);

nlohmann::ordered_json stats_to_json(const DatasetStats& s);
// Long format: "panel,key,count".
std::string stats_to_csv(const DatasetStats& s);

}  // namespace mobilegen
