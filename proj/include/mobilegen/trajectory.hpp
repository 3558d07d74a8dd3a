#pragma once

#include "mobilegen/action.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobilegen {

enum class DifficultyLevel { easy = 1, medium = 2, hard = 3 };

inline constexpr DifficultyLevel kAllLevels[] = {DifficultyLevel::easy, DifficultyLevel::medium,
                                                 DifficultyLevel::hard};

inline int numeric_score(DifficultyLevel level) noexcept { return static_cast<int>(level); }
std::string_view to_string(DifficultyLevel level) noexcept;
std::optional<DifficultyLevel> level_from_name(std::string_view name) noexcept;

// Relative paths inside a trajectory directory. Both the raw and the
// SoM-annotated screenshot are kept.
struct ObservationRef {
    std::string screenshot;
    std::string som_screenshot;
    std::string ui_tree;

    friend bool operator==(const ObservationRef&, const ObservationRef&) = default;
};

struct Step {
    int index = 1;  // 1-based
    std::string app;
    ObservationRef observation;
    Action action;
    std::optional<std::string> thought;
    std::optional<std::string> summary;

    friend bool operator==(const Step&, const Step&) = default;
};

struct DifficultyParams {
    int dot = 1;  // depth: total steps
    int bot = 1;  // breadth: distinct apps
    DifficultyLevel icd = DifficultyLevel::easy;
    DifficultyLevel iud = DifficultyLevel::easy;
    std::vector<std::string> app_set;

    friend bool operator==(const DifficultyParams&, const DifficultyParams&) = default;
};

struct StepScore {
    int index = 1;
    int score = 1;
    std::string reason;

    friend bool operator==(const StepScore&, const StepScore&) = default;
};

struct QualityScores {
    std::vector<StepScore> steps;
    int trajectory_score = 1;
    std::string trajectory_reason;

    friend bool operator==(const QualityScores&, const QualityScores&) = default;
};

struct Trajectory {
    std::string id;
    std::string instruction;
    DifficultyParams params;
    std::vector<Step> steps;
    std::optional<QualityScores> quality;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct Violation {
    std::string invariant;
    std::optional<int> position;  // 1-based step position, when the violation is step-local
    std::string message;
};

std::vector<Violation> validate_params(const DifficultyParams& params);
std::vector<Violation> validate_trajectory(const Trajectory& t);

// Distinct apps in step order of first appearance.
std::vector<std::string> apps_in_steps(const Trajectory& t);

nlohmann::ordered_json params_to_json(const DifficultyParams& p);
DifficultyParams params_from_json(const nlohmann::json& j);

// UTF-8 JSON. serialize() rejects trajectories that fail validation;
// deserialize() rejects unknown or missing fields with SchemaViolation.
std::string serialize(const Trajectory& t);
Trajectory deserialize(std::string_view bytes);

}  // namespace mobilegen
