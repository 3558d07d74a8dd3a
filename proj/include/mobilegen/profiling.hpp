#pragma once

#include "mobilegen/environment.hpp"
#include "mobilegen/matching.hpp"
#include "mobilegen/model_client.hpp"
#include "mobilegen/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace mobilegen {

struct StepOutcome {
    std::string trajectory_id;
    int step_index = 1;
    std::string app;
    bool passed = false;  // any of the K samples matched
    int m_int = 1;
    int m_ins = 1;

    friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct CapabilityProfile {
    double c_d = 0.0;    // expected correct steps per trajectory
    double c_b = 0.0;    // expected reliably handled apps per trajectory
    double c_int = 2.0;
    double c_ins = 2.0;
    std::map<std::string, double> vulnerabilities;             // raw failure rate per app
    std::map<std::string, double> normalized_vulnerabilities;  // min-max scaled
    double v_star = 0.5;
    // True when no step passed and c_int/c_ins carry the middle score.
    bool semantic_fallback = false;
    std::size_t trajectories = 0;
    std::size_t steps = 0;
};

inline constexpr double kSemanticFallbackScore = 2.0;

// Pass-weighted mean difficulty scores (c_int, c_ins). Throws NoCorrectSteps
// when nothing passed.
std::pair<double, double> semantic_capability(const std::vector<StepOutcome>& outcomes);

// Min-max scaling over the observed apps; all-equal inputs map to 0.5.
std::map<std::string, double> normalize_vulnerabilities(const std::map<std::string, double>& v);

// Throws EmptyDataset for no outcomes. Falls back to the middle semantic score
// when nothing passed.
CapabilityProfile compute_profile(const std::vector<StepOutcome>& outcomes);

nlohmann::ordered_json profile_to_json(const CapabilityProfile& p);
CapabilityProfile profile_from_json(const nlohmann::json& j);

// One step of a prior trajectory, as the student sees it.
struct PriorStep {
    std::string trajectory_id;
    int step_index = 1;
    std::string app;
    std::string instruction;
    DifficultyLevel icd = DifficultyLevel::easy;
    DifficultyLevel iud = DifficultyLevel::easy;
    std::vector<std::string> history;   // summaries of earlier steps
    std::vector<std::string> latest;    // rendered reason/action of the last steps
    Observation observation;
    std::string som_png;  // may be empty; the prompt then carries the UI tree only
    Action ground_truth;
};

struct ProfilingOptions {
    int k = 3;
    double temperature = 0.2;
    int max_concurrency = 4;
    MatchConfig match;
};

// One UI element per line: "[index] type "label" (l, t, r, b)".
std::string describe_elements(const Observation& obs);

ChatRequest student_request(const PriorStep& step, double temperature, std::uint64_t sample);

// Student replies are expected as Reason/Action text, but a bare JSON object
// is accepted too. Returns nullopt for anything unparseable.
std::optional<Action> parse_student_action(std::string_view text);

// Pass@K over every step. Unparseable samples count as failures. Model
// failures propagate with the trajectory and step attached to the message.
std::vector<StepOutcome> evaluate_prior(ChatClient& model, const std::vector<PriorStep>& steps,
                                        const ProfilingOptions& opts);

}  // namespace mobilegen
