#pragma once

#include "mobilegen/environment.hpp"
#include "mobilegen/model_client.hpp"
#include "mobilegen/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace mobilegen {

struct Judgement {
    int score = 1;
    std::string reason;
};

// Lenient reader for {"score", "reason"}: a numeric string is accepted, the
// score must still be an integer in [1, 10]. Throws InvalidJudgeOutput.
Judgement parse_step_judgement(std::string_view text);

// Strict two-line "Reason: ..." / "Score: N" format. Throws InvalidJudgeOutput.
Judgement parse_trajectory_judgement(std::string_view text);

struct StepContext {
    std::string instruction;
    Action action;
    std::string reasoning;
    const UiElement* element = nullptr;
    const Observation* before = nullptr;
    const Observation* after = nullptr;
};

struct JudgeOptions {
    double temperature = 0.0;
    int screenshots = 4;  // most recent screenshots shown to the trajectory judge
    bool attach_screenshots = true;
};

// One re-ask on bad output, then InvalidJudgeOutput.
Judgement judge_step(const StepContext& ctx, ChatClient& judge, const JudgeOptions& opts = {});

struct TrajectoryStats {
    int steps = 0;
    int apps = 0;
    int distinct_screens = 0;
    int repeated_actions = 0;  // (screen, action) pairs seen before in the trajectory
    int no_effect_steps = 0;

    std::string render() const;
};

// `before` holds the observation each step acted on, `final_observation` the end state.
TrajectoryStats trajectory_stats(const Trajectory& t, const std::vector<Observation>& before,
                                 const Observation& final_observation);

Judgement judge_trajectory(const Trajectory& t, const std::vector<Observation>& before,
                           const Observation& final_observation, ChatClient& judge, const JudgeOptions& opts = {});

struct QualityReport {
    std::string trajectory_id;
    std::vector<StepScore> step_scores;
    int trajectory_score = 1;
    std::string trajectory_reason;
    bool kept = false;
};

nlohmann::ordered_json report_to_json(const QualityReport& r);
QualityReport report_from_json(const nlohmann::json& j);

// Ids whose trajectory score strictly exceeds the threshold, in input order.
// Throws InvalidArgument unless 1 <= threshold <= 10.
std::vector<std::string> filter_dataset(const std::vector<QualityReport>& reports, int threshold);

}  // namespace mobilegen
