#include "mobilegen/trajectory.hpp"

#include "mobilegen/error.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

namespace mobilegen {

namespace {

using ojson = nlohmann::ordered_json;

void expect_object(const nlohmann::json& j, std::string_view where, std::initializer_list<std::string_view> required,
                   std::initializer_list<std::string_view> optional = {})
{
    if (!j.is_object()) {
        throw Error(ErrorCode::schema_violation, std::string(where) + " is not an object");
    }
    for (auto key : required) {
        if (!j.contains(key)) {
            throw Error(ErrorCode::schema_violation, std::string(where) + " is missing '" + std::string(key) + "'");
        }
    }
    for (const auto& [key, value] : j.items()) {
        const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                           std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known) {
            throw Error(ErrorCode::schema_violation, std::string(where) + " has unknown field '" + key + "'");
        }
    }
}

template <typename T>
T get_as(const nlohmann::json& j, std::string_view key, std::string_view where)
{
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::schema_violation,
                    std::string(where) + "." + std::string(key) + " has the wrong type");
    }
}

std::optional<std::string> get_opt_string(const nlohmann::json& j, std::string_view key, std::string_view where)
{
    const auto& v = j.at(key);
    if (v.is_null()) {
        return std::nullopt;
    }
    if (!v.is_string()) {
        throw Error(ErrorCode::schema_violation, std::string(where) + "." + std::string(key) + " is not a string");
    }
    return v.get<std::string>();
}

DifficultyLevel level_from_json(const nlohmann::json& j, std::string_view where)
{
    if (!j.is_string()) {
        throw Error(ErrorCode::schema_violation, std::string(where) + " is not a level name");
    }
    auto level = level_from_name(j.get<std::string>());
    if (!level) {
        throw Error(ErrorCode::schema_violation, std::string(where) + " has unknown level " + j.dump());
    }
    return *level;
}

Action strict_action(const nlohmann::json& j)
{
    expect_object(j, "action", {"action_type"}, {"index", "x", "y", "text", "direction", "app_name"});
    const auto& type = j.at("action_type");
    if (!type.is_string() || !action_type_from_name(type.get<std::string>())) {
        throw Error(ErrorCode::schema_violation, "action_type " + type.dump() + " is not in the action space");
    }
    try {
        return action_from_json(j);
    } catch (const Error& e) {
        throw Error(ErrorCode::schema_violation, e.what());
    }
}

ojson step_to_json(const Step& s)
{
    ojson j;
    j["index"] = s.index;
    j["app"] = s.app;
    j["observation"] = {{"screenshot", s.observation.screenshot},
                        {"som_screenshot", s.observation.som_screenshot},
                        {"ui_tree", s.observation.ui_tree}};
    j["action"] = action_to_json(s.action);
    j["thought"] = s.thought ? ojson(*s.thought) : ojson(nullptr);
    j["summary"] = s.summary ? ojson(*s.summary) : ojson(nullptr);
    return j;
}

Step step_from_json(const nlohmann::json& j)
{
    expect_object(j, "step", {"index", "app", "observation", "action", "thought", "summary"});
    Step s;
    s.index = get_as<int>(j, "index", "step");
    s.app = get_as<std::string>(j, "app", "step");
    const auto& obs = j.at("observation");
    expect_object(obs, "step.observation", {"screenshot", "som_screenshot", "ui_tree"});
    s.observation.screenshot = get_as<std::string>(obs, "screenshot", "observation");
    s.observation.som_screenshot = get_as<std::string>(obs, "som_screenshot", "observation");
    s.observation.ui_tree = get_as<std::string>(obs, "ui_tree", "observation");
    s.action = strict_action(j.at("action"));
    s.thought = get_opt_string(j, "thought", "step");
    s.summary = get_opt_string(j, "summary", "step");
    return s;
}

ojson quality_to_json(const QualityScores& q)
{
    ojson steps = ojson::array();
    for (const auto& s : q.steps) {
        steps.push_back({{"index", s.index}, {"score", s.score}, {"reason", s.reason}});
    }
    ojson j;
    j["step_scores"] = steps;
    j["trajectory_score"] = q.trajectory_score;
    j["trajectory_reason"] = q.trajectory_reason;
    return j;
}

QualityScores quality_from_json(const nlohmann::json& j)
{
    expect_object(j, "quality", {"step_scores", "trajectory_score", "trajectory_reason"});
    QualityScores q;
    if (!j.at("step_scores").is_array()) {
        throw Error(ErrorCode::schema_violation, "quality.step_scores is not an array");
    }
    for (const auto& s : j.at("step_scores")) {
        expect_object(s, "step_score", {"index", "score", "reason"});
        q.steps.push_back(StepScore{get_as<int>(s, "index", "step_score"), get_as<int>(s, "score", "step_score"),
                                    get_as<std::string>(s, "reason", "step_score")});
    }
    q.trajectory_score = get_as<int>(j, "trajectory_score", "quality");
    q.trajectory_reason = get_as<std::string>(j, "trajectory_reason", "quality");
    return q;
}

}  // namespace

std::string_view to_string(DifficultyLevel level) noexcept
{
    switch (level) {
    case DifficultyLevel::easy: return "easy";
    case DifficultyLevel::medium: return "medium";
    case DifficultyLevel::hard: return "hard";
    }
    return "easy";
}

std::optional<DifficultyLevel> level_from_name(std::string_view name) noexcept
{
    for (auto level : kAllLevels) {
        if (to_string(level) == name) {
            return level;
        }
    }
    return std::nullopt;
}

std::vector<Violation> validate_params(const DifficultyParams& p)
{
    std::vector<Violation> out;
    if (p.bot < 1 || p.bot > p.dot) {
        out.push_back({"1 <= bot <= dot", std::nullopt,
                       "bot " + std::to_string(p.bot) + " outside [1, " + std::to_string(p.dot) + "]"});
    }
    if (static_cast<int>(p.app_set.size()) != p.bot) {
        out.push_back({"|app_set| = bot", std::nullopt,
                       "app_set has " + std::to_string(p.app_set.size()) + " apps, bot is " + std::to_string(p.bot)});
    }
    std::set<std::string> seen;
    for (const auto& app : p.app_set) {
        if (!seen.insert(app).second) {
            out.push_back({"app_set has no duplicates", std::nullopt, "duplicate app " + app + " in sampled set"});
        }
    }
    return out;
}

std::vector<Violation> validate_trajectory(const Trajectory& t)
{
    std::vector<Violation> out = validate_params(t.params);
    if (static_cast<int>(t.steps.size()) > t.params.dot) {
        out.push_back({"step count <= dot", std::nullopt,
                       std::to_string(t.steps.size()) + " steps exceed dot " + std::to_string(t.params.dot)});
    }
    const std::set<std::string> allowed(t.params.app_set.begin(), t.params.app_set.end());
    std::set<std::string> reported;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        const int position = static_cast<int>(i) + 1;
        if (step.index != position) {
            out.push_back({"contiguous step indices", position,
                           "non-contiguous step index at position " + std::to_string(position)});
        }
        if (!allowed.contains(step.app) && reported.insert(step.app).second) {
            out.push_back({"apps(steps) within app_set", position, "app " + step.app + " not in sampled set"});
        }
    }
    return out;
}

std::vector<std::string> apps_in_steps(const Trajectory& t)
{
    std::vector<std::string> apps;
    for (const auto& s : t.steps) {
        if (std::find(apps.begin(), apps.end(), s.app) == apps.end()) {
            apps.push_back(s.app);
        }
    }
    return apps;
}

nlohmann::ordered_json params_to_json(const DifficultyParams& p)
{
    ojson j;
    j["dot"] = p.dot;
    j["bot"] = p.bot;
    j["icd"] = std::string(to_string(p.icd));
    j["iud"] = std::string(to_string(p.iud));
    j["app_set"] = p.app_set;
    return j;
}

DifficultyParams params_from_json(const nlohmann::json& j)
{
    expect_object(j, "params", {"dot", "bot", "icd", "iud", "app_set"});
    DifficultyParams p;
    p.dot = get_as<int>(j, "dot", "params");
    p.bot = get_as<int>(j, "bot", "params");
    p.icd = level_from_json(j.at("icd"), "params.icd");
    p.iud = level_from_json(j.at("iud"), "params.iud");
    p.app_set = get_as<std::vector<std::string>>(j, "app_set", "params");
    return p;
}

std::string serialize(const Trajectory& t)
{
    auto violations = validate_trajectory(t);
    if (!violations.empty()) {
        throw Error(ErrorCode::schema_violation, "trajectory " + t.id + " is invalid: " + violations.front().message);
    }
    ojson j;
    j["id"] = t.id;
    j["instruction"] = t.instruction;
    j["params"] = params_to_json(t.params);
    ojson steps = ojson::array();
    for (const auto& s : t.steps) {
        steps.push_back(step_to_json(s));
    }
    j["steps"] = steps;
    j["quality"] = t.quality ? quality_to_json(*t.quality) : ojson(nullptr);
    return j.dump(2) + "\n";
}

Trajectory deserialize(std::string_view bytes)
{
    nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::schema_violation, "trajectory is not valid JSON");
    }
    expect_object(j, "trajectory", {"id", "instruction", "params", "steps", "quality"});
    Trajectory t;
    t.id = get_as<std::string>(j, "id", "trajectory");
    t.instruction = get_as<std::string>(j, "instruction", "trajectory");
    t.params = params_from_json(j.at("params"));
    if (!j.at("steps").is_array()) {
        throw Error(ErrorCode::schema_violation, "trajectory.steps is not an array");
    }
    for (const auto& s : j.at("steps")) {
        t.steps.push_back(step_from_json(s));
    }
    if (!j.at("quality").is_null()) {
        t.quality = quality_from_json(j.at("quality"));
    }
    return t;
}

}  // namespace mobilegen
