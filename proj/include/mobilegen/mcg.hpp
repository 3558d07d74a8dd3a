#pragma once

#include "mobilegen/environment.hpp"
#include "mobilegen/model_client.hpp"
#include "mobilegen/trajectory.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mobilegen {

struct BudgetState {
    std::map<std::string, double> weights;
    std::map<std::string, int> budgets;  // current allocation epoch
    std::map<std::string, int> used;     // steps consumed in the current epoch
    std::map<std::string, int> cyclic;   // cyclic counter per app
    int gamma = 3;
    double penalty = 0.3;
};

// Largest-remainder split of floor(w * total); every app ends with at least
// one step. Weights are renormalized over `apps` first.
std::map<std::string, int> fallback_allocation(const std::vector<std::string>& apps, int total,
                                               const std::map<std::string, double>& weights);

struct Allocation {
    std::map<std::string, int> budgets;
    bool from_supervisor = false;
    std::string rejection;  // why the supervisor answer was not used, if it was asked
};

// Initializes empty `weights` uniformly over `apps`, asks the supervisor (when
// given) for a JSON split and validates it, otherwise falls back. Throws
// BudgetInfeasible when total < |apps|.
Allocation allocate_budgets(const std::vector<std::string>& apps, int total, std::map<std::string, double>& weights,
                            ChatClient* supervisor, double temperature = 0.0);

// Penalizes `app` when its cyclic counter exceeds gamma, then renormalizes.
// Returns whether the weights changed. Throws UnknownApp.
bool update_weights(BudgetState& state, const std::string& app);

struct MemoryRecord {
    int step = 1;
    std::string app;
    std::string screen;         // screen the action was taken on ("app/screen_id")
    std::string result_screen;  // screen reached afterwards
    Action action;
    std::string reason;
    std::string summary;
    bool no_effect = false;
};

struct WorkingMemory {
    std::vector<MemoryRecord> records;

    void append(MemoryRecord r);
    void truncate_after(int step);
    const MemoryRecord* find(int step) const;
    // One line per record, for supervisor prompts.
    std::string render(std::size_t last_n = 0) const;
};

enum class CycleSignal { none, repeat, novel };

// Looks only at the newest record: `repeat` when its (screen, action) pair
// already occurs among the previous window-1 records, `novel` when it reached
// a screen never seen before in memory.
CycleSignal detect_cycle(const WorkingMemory& memory, std::size_t window);

struct RollbackDirective {
    int target_step = 1;
    std::vector<std::string> failed_actions;  // summaries of records after the target
};

struct RollbackCheck {
    std::optional<RollbackDirective> directive;
    bool unparseable = false;
    bool invalid_target = false;
    std::string raw;
};

RollbackCheck check_rollback(const WorkingMemory& memory, int current_step, ChatClient& supervisor,
                             double temperature = 0.0);

// Parses the supervisor's decision text. nullopt target means no backtrack.
struct SupervisorDecision {
    std::optional<int> target;
    bool recognized = false;
};
SupervisorDecision parse_supervisor_decision(std::string_view text);

struct McgConfig {
    int gamma = 3;
    double penalty = 0.3;
    std::size_t cycle_window = 6;
    int max_rollbacks = 3;
    int history_words = 80;
    int action_words = 20;
    int explorer_retries = 2;
    std::size_t latest_steps = 3;
    double temperature = 0.0;
    bool attach_screenshots = true;
};

enum class RunStatus { complete, incomplete, failed };
std::string_view to_string(RunStatus s) noexcept;

struct GenerationResult {
    Trajectory trajectory;  // instruction and thoughts are empty until synthesis
    std::vector<Observation> before;  // observation each step acted on
    Observation final_observation;
    std::vector<std::string> reasons;  // explorer reasoning per step
    std::vector<bool> no_effect;
    RunStatus status = RunStatus::complete;
    std::string message;
    int rollbacks = 0;
    BudgetState budget;
    std::vector<std::string> events;

    Observation after(std::size_t step_pos) const
    {
        return step_pos + 1 < before.size() ? before[step_pos + 1] : final_observation;
    }
};

// Never throws for model or environment faults; those end the run with
// status failed. Trajectories that miss an app of the sampled set are marked
// incomplete.
GenerationResult run_trajectory(const std::string& id, const DifficultyParams& params, Environment& env,
                                ChatClient& explorer, ChatClient& supervisor, const McgConfig& cfg = {});

std::string truncate_words(std::string_view text, int max_words);

// Element the action targets on `obs`, if any.
const UiElement* target_element(const Observation& obs, const Action& action);

// Returns nullopt when the synthesizer fails twice to produce the JSON object.
std::optional<std::string> synthesize_thought(const Observation& before, const Action& action,
                                              const Observation& after, ChatClient& synthesizer,
                                              double temperature = 0.0, bool attach_screenshots = true);

// Throws ConstraintViolated when the instruction still misses an app name or a
// typed text after two re-asks.
std::string synthesize_instruction(const Trajectory& t, DifficultyLevel iud, ChatClient& synthesizer,
                                   double temperature = 0.0);

// Checks the verbatim requirements; returns the first missing string.
std::optional<std::string> missing_instruction_term(const Trajectory& t, std::string_view instruction);

std::vector<std::string> required_input_texts(const Trajectory& t);

}  // namespace mobilegen
