#include "mobilegen/dataset.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/render.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace mobilegen {

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ostringstream suffix;
    suffix << ".tmp" << std::this_thread::get_id();
    fs::path tmp = path;
    tmp += suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error(ErrorCode::io_error, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::io_error, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

namespace {

void write_observation(const fs::path& dir, const std::string& stem, Observation& obs, bool render_images)
{
    obs.screenshot_ref = "screens/" + stem + ".png";
    obs.som_ref = "screens/" + stem + ".som.png";
    obs.ui_tree_ref = "ui/" + stem + ".json";
    if (render_images) {
        write_file(dir / obs.screenshot_ref, render_screenshot_png(obs));
        write_file(dir / obs.som_ref, render_som_png(obs));
    }
    write_file(dir / obs.ui_tree_ref, observation_to_json(obs).dump(2) + "\n");
}

Observation read_observation(const fs::path& path)
{
    auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::schema_violation, path.string() + " is not valid JSON");
    }
    return observation_from_json(j);
}

}  // namespace

void write_trajectory_json(const fs::path& dir, const Trajectory& t)
{
    write_file(dir / "trajectory.json", serialize(t));
}

void write_record(const fs::path& dir, TrajectoryRecord& record, bool render_images)
{
    auto& t = record.trajectory;
    if (record.before.size() != t.steps.size()) {
        throw Error(ErrorCode::invalid_argument, "trajectory " + t.id + " needs one observation per step");
    }
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const std::string stem = std::to_string(t.steps[i].index);
        write_observation(dir, stem, record.before[i], render_images);
        t.steps[i].observation = {record.before[i].screenshot_ref, record.before[i].som_ref,
                                  record.before[i].ui_tree_ref};
    }
    write_observation(dir, "final", record.final_observation, render_images);
    write_trajectory_json(dir, t);
}

TrajectoryRecord read_record(const fs::path& dir)
{
    TrajectoryRecord rec;
    rec.trajectory = deserialize(read_file(dir / "trajectory.json"));
    for (const auto& step : rec.trajectory.steps) {
        rec.before.push_back(read_observation(dir / step.observation.ui_tree));
    }
    rec.final_observation = read_observation(dir / "ui" / "final.json");
    return rec;
}

std::vector<fs::path> list_records(const fs::path& root)
{
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) {
        return out;
    }
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "trajectory.json")) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

DatasetStats compute_stats(const std::vector<Trajectory>& trajectories)
{
    DatasetStats s;
    s.trajectories = trajectories.size();
    for (const auto& t : trajectories) {
        for (const auto& app : t.params.app_set) {
            ++s.app_frequency[app];
        }
        ++s.dot[t.params.dot];
        ++s.steps[static_cast<int>(t.steps.size())];
        ++s.bot[t.params.bot];
        ++s.icd[std::string(to_string(t.params.icd))];
        ++s.iud[std::string(to_string(t.params.iud))];
    }
    return s;
}

DatasetStats export_stats(const fs::path& dataset_dir)
{
    std::vector<Trajectory> all;
    for (const auto& dir : list_records(dataset_dir)) {
        all.push_back(deserialize(read_file(dir / "trajectory.json")));
    }
    if (all.empty()) {
        throw Error(ErrorCode::empty_dataset, "no trajectories under " + dataset_dir.string());
    }
    return compute_stats(all);
}

namespace {

template <typename K>
nlohmann::ordered_json counts_json(const std::map<K, int>& m)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) {
        if constexpr (std::is_same_v<K, std::string>) {
            j[k] = v;
        } else {
            j[std::to_string(k)] = v;
        }
    }
    return j;
}

template <typename K>
void counts_csv(std::string& out, std::string_view panel, const std::map<K, int>& m)
{
    for (const auto& [k, v] : m) {
        out += panel;
        out += ',';
        if constexpr (std::is_same_v<K, std::string>) {
            const bool quote = k.find_first_of(",\"\n") != std::string::npos;
            if (quote) {
                out += '"';
                for (char c : k) {
                    out += c;
                    if (c == '"') {
                        out += '"';
                    }
                }
                out += '"';
            } else {
                out += k;
            }
        } else {
            out += std::to_string(k);
        }
        out += ',' + std::to_string(v) + '\n';
    }
}

}  // namespace

nlohmann::ordered_json stats_to_json(const DatasetStats& s)
{
    nlohmann::ordered_json j;
    j["trajectories"] = s.trajectories;
    j["app_frequency"] = counts_json(s.app_frequency);
    j["dot"] = counts_json(s.dot);
    j["steps"] = counts_json(s.steps);
    j["bot"] = counts_json(s.bot);
    j["icd"] = counts_json(s.icd);
    j["iud"] = counts_json(s.iud);
    return j;
}

std::string stats_to_csv(const DatasetStats& s)
{
    std::string out = "panel,key,count\n";
    counts_csv(out, "app_frequency", s.app_frequency);
    counts_csv(out, "dot", s.dot);
    counts_csv(out, "steps", s.steps);
    counts_csv(out, "bot", s.bot);
    counts_csv(out, "icd", s.icd);
    counts_csv(out, "iud", s.iud);
    return out;
}

}  // namespace mobilegen
