#include "mobilegen/mcg.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/profiling.hpp"
#include "mobilegen/prompts.hpp"
#include "mobilegen/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

namespace mobilegen {

namespace {

std::string screen_key(const Observation& obs)
{
    return obs.app + "/" + obs.screen_id;
}

std::string join(const std::vector<std::string>& items, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += items[i];
    }
    return out;
}

std::string format_weight(double w)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", w);
    return buf;
}

// Multi-turn re-ask: previous prompt, the rejected answer, then the complaint.
ChatRequest reask(ChatRequest request, const std::string& rejected, const std::string& complaint)
{
    request.messages.push_back(ChatMessage::text(Role::assistant, rejected));
    request.messages.push_back(ChatMessage::text(Role::user, complaint));
    return request;
}

std::optional<nlohmann::json> parse_json_object(std::string_view text)
{
    auto object = extract_json_object(text);
    if (!object) {
        return std::nullopt;
    }
    auto j = nlohmann::json::parse(*object, nullptr, false);
    if (j.is_discarded()) {
        j = nlohmann::json::parse(normalize_json_like(*object), nullptr, false);
    }
    if (j.is_discarded() || !j.is_object()) {
        return std::nullopt;
    }
    return j;
}

}  // namespace

std::string_view to_string(RunStatus s) noexcept
{
    switch (s) {
    case RunStatus::complete:
        return "complete";
    case RunStatus::incomplete:
        return "incomplete";
    case RunStatus::failed:
        return "failed";
    }
    return "failed";
}

std::map<std::string, int> fallback_allocation(const std::vector<std::string>& apps, int total,
                                               const std::map<std::string, double>& weights)
{
    if (apps.empty()) {
        throw Error(ErrorCode::empty_app_set, "no apps to allocate steps to");
    }
    if (total < static_cast<int>(apps.size())) {
        throw Error(ErrorCode::budget_infeasible, std::to_string(total) + " steps cannot cover " +
                                                      std::to_string(apps.size()) + " apps");
    }
    std::vector<double> w(apps.size(), 1.0);
    double sum = 0.0;
    if (!weights.empty()) {
        for (std::size_t i = 0; i < apps.size(); ++i) {
            auto it = weights.find(apps[i]);
            if (it == weights.end()) {
                throw Error(ErrorCode::unknown_app, "no weight for " + apps[i]);
            }
            w[i] = it->second;
        }
    }
    for (double x : w) {
        sum += x;
    }
    if (!(sum > 0.0)) {
        std::fill(w.begin(), w.end(), 1.0);
        sum = static_cast<double>(w.size());
    }

    std::vector<int> alloc(apps.size());
    std::vector<double> remainder(apps.size());
    int assigned = 0;
    for (std::size_t i = 0; i < apps.size(); ++i) {
        const double exact = w[i] / sum * total;
        alloc[i] = static_cast<int>(std::floor(exact + 1e-9));
        remainder[i] = exact - alloc[i];
        assigned += alloc[i];
    }
    std::vector<std::size_t> order(apps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
        ++alloc[order[k]];
        ++assigned;
    }
    // every app must be visited at least once
    for (std::size_t i = 0; i < apps.size(); ++i) {
        if (alloc[i] == 0) {
            auto donor = std::max_element(alloc.begin(), alloc.end()) - alloc.begin();
            --alloc[static_cast<std::size_t>(donor)];
            alloc[i] = 1;
        }
    }

    std::map<std::string, int> out;
    for (std::size_t i = 0; i < apps.size(); ++i) {
        out[apps[i]] = alloc[i];
    }
    return out;
}

namespace {

std::optional<std::map<std::string, int>> parse_allocation(std::string_view text, const std::vector<std::string>& apps,
                                                           int total, std::string& why)
{
    auto j = parse_json_object(text);
    if (!j) {
        why = "no JSON object in the answer";
        return std::nullopt;
    }
    std::map<std::string, int> out;
    int sum = 0;
    for (const auto& app : apps) {
        if (!j->contains(app)) {
            why = "app " + app + " missing";
            return std::nullopt;
        }
        const auto& v = (*j)[app];
        if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))) {
            why = "budget of " + app + " is not an integer";
            return std::nullopt;
        }
        const auto n = v.get<long long>();
        if (n < 1 || n > total) {
            why = "budget of " + app + " out of range";
            return std::nullopt;
        }
        out[app] = static_cast<int>(n);
        sum += static_cast<int>(n);
    }
    if (j->size() != apps.size()) {
        why = "answer names apps outside the pending set";
        return std::nullopt;
    }
    if (sum != total) {
        why = "budgets sum to " + std::to_string(sum) + ", not " + std::to_string(total);
        return std::nullopt;
    }
    return out;
}

}  // namespace

Allocation allocate_budgets(const std::vector<std::string>& apps, int total, std::map<std::string, double>& weights,
                            ChatClient* supervisor, double temperature)
{
    if (apps.empty()) {
        throw Error(ErrorCode::empty_app_set, "no apps to allocate steps to");
    }
    if (total < static_cast<int>(apps.size())) {
        throw Error(ErrorCode::budget_infeasible, std::to_string(total) + " steps cannot cover " +
                                                      std::to_string(apps.size()) + " apps");
    }
    if (weights.empty()) {
        for (const auto& app : apps) {
            weights[app] = 1.0 / static_cast<double>(apps.size());
        }
    }

    Allocation result;
    if (supervisor != nullptr) {
        nlohmann::ordered_json w;
        for (const auto& app : apps) {
            auto it = weights.find(app);
            if (it == weights.end()) {
                throw Error(ErrorCode::unknown_app, "no weight for " + app);
            }
            w[app] = std::stod(format_weight(it->second));
        }
        const std::string prompt = prompts::fill(prompts::kSupervisorBudget, {
                                                                                 {"TARGET_APPS", join(apps, ", ")},
                                                                                 {"TOTAL_STEPS", std::to_string(total)},
                                                                                 {"WEIGHTS", w.dump()},
                                                                             });
        const auto reply = supervisor->complete(ChatRequest::user_prompt(prompt, temperature));
        if (auto parsed = parse_allocation(reply.text, apps, total, result.rejection)) {
            result.budgets = std::move(*parsed);
            result.from_supervisor = true;
            return result;
        }
    }
    result.budgets = fallback_allocation(apps, total, weights);
    return result;
}

bool update_weights(BudgetState& state, const std::string& app)
{
    auto it = state.weights.find(app);
    if (it == state.weights.end()) {
        throw Error(ErrorCode::unknown_app, "no weight for " + app);
    }
    const int counter = state.cyclic.contains(app) ? state.cyclic.at(app) : 0;
    if (counter <= state.gamma) {
        return false;
    }
    it->second *= (1.0 - state.penalty);
    double sum = 0.0;
    for (const auto& [name, w] : state.weights) {
        sum += w;
    }
    for (auto& [name, w] : state.weights) {
        w /= sum;
    }
    return true;
}

void WorkingMemory::append(MemoryRecord r)
{
    if (!records.empty() && r.step <= records.back().step) {
        throw Error(ErrorCode::invalid_argument, "memory records must have increasing step numbers");
    }
    records.push_back(std::move(r));
}

void WorkingMemory::truncate_after(int step)
{
    std::erase_if(records, [step](const MemoryRecord& r) { return r.step > step; });
}

const MemoryRecord* WorkingMemory::find(int step) const
{
    for (const auto& r : records) {
        if (r.step == step) {
            return &r;
        }
    }
    return nullptr;
}

std::string WorkingMemory::render(std::size_t last_n) const
{
    if (records.empty()) {
        return "None";
    }
    const std::size_t first = last_n == 0 || last_n >= records.size() ? 0 : records.size() - last_n;
    std::string out;
    for (std::size_t i = first; i < records.size(); ++i) {
        const auto& r = records[i];
        out += "\nStep " + std::to_string(r.step) + " [" + r.app + "] @" + r.screen + ": " + r.summary +
               " | action: " + action_compact(r.action);
        if (r.no_effect) {
            out += " (no effect)";
        }
    }
    return out;
}

CycleSignal detect_cycle(const WorkingMemory& memory, std::size_t window)
{
    const auto& recs = memory.records;
    if (recs.empty()) {
        return CycleSignal::none;
    }
    const auto& newest = recs.back();
    const std::string key = action_compact(newest.action);
    const std::size_t span = window == 0 ? 0 : window - 1;
    const std::size_t lo = recs.size() - 1 > span ? recs.size() - 1 - span : 0;
    for (std::size_t i = lo; i + 1 < recs.size(); ++i) {
        if (recs[i].screen == newest.screen && action_compact(recs[i].action) == key) {
            return CycleSignal::repeat;
        }
    }
    for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        if (recs[i].screen == newest.result_screen || recs[i].result_screen == newest.result_screen) {
            return CycleSignal::none;
        }
    }
    return newest.screen == newest.result_screen ? CycleSignal::none : CycleSignal::novel;
}

SupervisorDecision parse_supervisor_decision(std::string_view text)
{
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    static const std::regex backtrack(R"(backtrack to step\s*<?\s*(\d+))");
    std::smatch m;
    if (std::regex_search(lower, m, backtrack)) {
        try {
            return {std::stoi(m[1].str()), true};
        } catch (const std::out_of_range&) {
            return {std::nullopt, false};
        }
    }
    if (lower.find("no backtrack needed") != std::string::npos) {
        return {std::nullopt, true};
    }
    return {std::nullopt, false};
}

RollbackCheck check_rollback(const WorkingMemory& memory, int current_step, ChatClient& supervisor,
                             double temperature)
{
    if (current_step < 1) {
        throw Error(ErrorCode::invalid_argument, "current step must be positive");
    }
    const std::string prompt = prompts::fill(prompts::kSupervisorErrorDetection,
                                             {
                                                 {"WORKING_MEMORY", memory.render()},
                                                 {"CURRENT_STEP", std::to_string(current_step)},
                                             });
    RollbackCheck out;
    out.raw = supervisor.complete(ChatRequest::user_prompt(prompt, temperature)).text;
    const auto decision = parse_supervisor_decision(out.raw);
    if (!decision.recognized) {
        out.unparseable = true;
        return out;
    }
    if (!decision.target) {
        return out;
    }
    const int target = *decision.target;
    if (target < 1 || target >= current_step || memory.find(target) == nullptr) {
        out.invalid_target = true;
        return out;
    }
    RollbackDirective d;
    d.target_step = target;
    for (const auto& r : memory.records) {
        if (r.step > target && r.step <= current_step) {
            d.failed_actions.push_back(r.summary.empty() ? action_compact(r.action) : r.summary);
        }
    }
    out.directive = std::move(d);
    return out;
}

std::string truncate_words(std::string_view text, int max_words)
{
    std::istringstream in{std::string(text)};
    std::string word;
    std::string out;
    int n = 0;
    while (in >> word) {
        if (n == max_words) {
            break;
        }
        if (n > 0) {
            out += ' ';
        }
        out += word;
        ++n;
    }
    return out;
}

const UiElement* target_element(const Observation& obs, const Action& action)
{
    if (action.has_index()) {
        return obs.element(action.index());
    }
    if (action.has_point()) {
        return obs.element_at(action.point());
    }
    return nullptr;
}

namespace {

ImagePayload png(std::string bytes)
{
    return ImagePayload{"image/png", std::move(bytes)};
}

std::optional<std::string> explorer_action_problem(const Action& a, const Observation& obs, const std::string& app)
{
    if (!is_generation_action(a.type)) {
        return std::string(to_string(a.type)) + " is not in the action list";
    }
    if (a.type == ActionType::open_app && a.app_name != app) {
        return "only " + app + " may be opened at this point";
    }
    if (a.has_index() && obs.element(a.index()) == nullptr) {
        return "there is no element with index " + std::to_string(a.index());
    }
    if (a.has_point()) {
        const Point p = a.point();
        if (p.x < 0 || p.y < 0 || p.x > obs.width || p.y > obs.height) {
            return "coordinates lie outside the screen";
        }
    }
    return std::nullopt;
}

class Generator {
public:
    Generator(const std::string& id, const DifficultyParams& params, Environment& env, ChatClient& explorer,
              ChatClient& supervisor, const McgConfig& cfg)
        : params_(params), env_(env), explorer_(explorer), supervisor_(supervisor), cfg_(cfg)
    {
        out_.trajectory.id = id;
        out_.trajectory.params = params;
        out_.budget.gamma = cfg.gamma;
        out_.budget.penalty = cfg.penalty;
    }

    GenerationResult run()
    {
        try {
            loop();
        } catch (const Error& e) {
            out_.status = RunStatus::failed;
            out_.message = e.what();
        }
        if (out_.status == RunStatus::failed) {
            return std::move(out_);
        }
        out_.final_observation = env_.observe();
        const auto visited = apps_in_steps(out_.trajectory);
        const std::set<std::string> seen(visited.begin(), visited.end());
        const std::set<std::string> wanted(params_.app_set.begin(), params_.app_set.end());
        if (seen != wanted && out_.status == RunStatus::complete) {
            out_.status = RunStatus::incomplete;
            out_.message = "visited " + std::to_string(seen.size()) + " of " + std::to_string(wanted.size()) + " apps";
        }
        return std::move(out_);
    }

private:
    void loop()
    {
        auto violations = validate_params(params_);
        if (!violations.empty()) {
            throw Error(ErrorCode::invalid_argument, violations.front().message);
        }
        env_.reset();
        env_.step(Action::open_app(params_.app_set.front()));
        snapshots_.push_back(env_.snapshot());
        segment_start_ = 1;

        reallocate(0);
        while (consumed_ < params_.dot) {
            auto& b = out_.budget;
            const std::string& app = current_app();
            if (b.used[app] >= b.budgets[app]) {
                if (current_ + 1 >= params_.app_set.size()) {
                    break;
                }
                ++current_;
                reallocate(current_);
                switch_app();
                continue;
            }
            if (!explore_step()) {
                break;
            }
        }
    }

    const std::string& current_app() const { return params_.app_set[current_]; }

    int step_count() const { return static_cast<int>(out_.trajectory.steps.size()); }

    // New allocation epoch over the apps from `first` on, with the steps left.
    void reallocate(std::size_t first)
    {
        auto& b = out_.budget;
        std::vector<std::string> pending(params_.app_set.begin() + static_cast<std::ptrdiff_t>(first),
                                         params_.app_set.end());
        const int remaining = params_.dot - consumed_;
        if (pending.empty() || remaining <= 0) {
            return;
        }
        if (remaining < static_cast<int>(pending.size())) {
            // the current app cannot keep a step; leave it and spread over the rest
            b.budgets[pending.front()] = b.used[pending.front()];
            pending.erase(pending.begin());
            if (pending.empty()) {
                return;
            }
        }
        std::map<std::string, double> pending_weights;
        if (!b.weights.empty()) {
            double sum = 0.0;
            for (const auto& app : pending) {
                sum += b.weights.at(app);
            }
            for (const auto& app : pending) {
                pending_weights[app] = b.weights.at(app) / sum;
            }
        }
        auto alloc = allocate_budgets(pending, remaining, pending_weights, &supervisor_, cfg_.temperature);
        if (b.weights.empty()) {
            b.weights = pending_weights;
        }
        if (!alloc.from_supervisor && !alloc.rejection.empty()) {
            out_.events.push_back("budget answer rejected: " + alloc.rejection);
        }
        for (const auto& [app, n] : alloc.budgets) {
            b.budgets[app] = n;
            b.used[app] = 0;
        }
    }

    void record(const Observation& before, const Action& action, const StepResult& result, std::string reason,
                std::string summary)
    {
        const int index = step_count() + 1;
        Step step;
        step.index = index;
        step.app = current_app();
        step.action = action;
        step.summary = summary;
        out_.trajectory.steps.push_back(std::move(step));
        out_.before.push_back(before);
        out_.reasons.push_back(reason);
        out_.no_effect.push_back(result.no_effect);

        MemoryRecord r;
        r.step = index;
        r.app = current_app();
        r.screen = screen_key(before);
        r.result_screen = screen_key(result.observation);
        r.action = action;
        r.reason = std::move(reason);
        r.summary = std::move(summary);
        r.no_effect = result.no_effect;
        memory_.append(std::move(r));

        ++out_.budget.used[current_app()];
        ++consumed_;
        snapshots_.push_back(env_.snapshot());
    }

    void switch_app()
    {
        const std::string& app = current_app();
        const Observation before = env_.observe();
        const Action action = Action::open_app(app);
        const StepResult result = env_.step(action);
        segment_start_ = step_count() + 1;
        const std::string reason = "The step budget of " + params_.app_set[current_ - 1] +
                                   " is used up, so I open " + app + " to continue there.";
        record(before, action, result, reason, "Opened " + app + " to continue exploring in it.");
    }

    std::string history_summary()
    {
        if (memory_.records.empty()) {
            return "None";
        }
        const std::string prompt = prompts::fill(prompts::kSupervisorHistorySummary,
                                                 {
                                                     {"STEP_RECORDS", memory_.render()},
                                                     {"CURRENT_APP", current_app()},
                                                     {"MAX_WORDS", std::to_string(cfg_.history_words)},
                                                 });
        return truncate_words(supervisor_.complete(ChatRequest::user_prompt(prompt, cfg_.temperature)).text,
                              cfg_.history_words);
    }

    std::string latest_steps() const
    {
        if (memory_.records.empty()) {
            return "None";
        }
        const auto& recs = memory_.records;
        const std::size_t first = recs.size() > cfg_.latest_steps ? recs.size() - cfg_.latest_steps : 0;
        std::string out;
        for (std::size_t i = first; i < recs.size(); ++i) {
            out += "\nStep " + std::to_string(recs[i].step) + ": Reason: " + recs[i].reason +
                   " Action: " + action_compact(recs[i].action);
        }
        return out;
    }

    ChatRequest explorer_request(const Observation& obs)
    {
        const auto& b = out_.budget;
        const std::string app = current_app();
        const int budget = b.budgets.at(app);
        const int left = budget - b.used.at(app);
        std::string guidelines = "Stay inside " + app + "; the controller switches apps when the budget is used.";
        if (warning_) {
            guidelines = *warning_ + "\n" + guidelines;
        }
        const std::string prompt = prompts::fill(
            prompts::kExplorerActionSelection,
            {
                {"ROLE_PLAY_PROMPT", std::string(prompts::kExplorerRole)},
                {"HISTORY_SUMMARY", history_summary()},
                {"LATEST_STEPS", latest_steps()},
                {"UI_ELEMENTS", "\nScreen: " + screen_key(obs) + "\n" + describe_elements(obs)},
                {"CURR_APP", app},
                {"APP_STEP_BUDGET", std::to_string(left) + " of " + std::to_string(budget) + " steps left"},
                {"INTERACTION_CONTROL_DIFFICULTY_PROMPT", std::string(prompts::interaction_control(params_.icd))},
                {"ADDITIONAL_GUIDELINES", guidelines},
            });
        ChatRequest r = ChatRequest::user_prompt(prompt, cfg_.temperature);
        if (cfg_.attach_screenshots) {
            r.messages.back().parts.emplace_back(png(render_som_png(obs)));
        }
        return r;
    }

    std::string action_summary(int step, const std::string& reason, const Action& action)
    {
        const std::string prompt = prompts::fill(prompts::kSupervisorActionSummary,
                                                 {
                                                     {"STEP_NUM", std::to_string(step)},
                                                     {"CURR_APP", current_app()},
                                                     {"THOUGHTS", reason},
                                                     {"ACTION", action_compact(action)},
                                                 });
        return truncate_words(supervisor_.complete(ChatRequest::user_prompt(prompt, cfg_.temperature)).text,
                              cfg_.action_words);
    }

    // Returns false when the trajectory has to stop.
    bool explore_step()
    {
        const Observation before = env_.observe();
        ChatRequest request = explorer_request(before);
        std::optional<ParsedAction> chosen;
        for (int attempt = 0; attempt <= cfg_.explorer_retries; ++attempt) {
            const auto reply = explorer_.complete(request);
            std::string problem;
            try {
                auto parsed = parse_action_text(reply.text);
                if (auto p = explorer_action_problem(parsed.action, before, current_app())) {
                    problem = *p;
                } else {
                    chosen = std::move(parsed);
                    break;
                }
            } catch (const Error& e) {
                problem = e.what();
            }
            out_.events.push_back("step " + std::to_string(step_count() + 1) + ": explorer answer rejected (" +
                                  problem + ")");
            request = reask(request, reply.text,
                            "Your previous answer could not be used: " + problem +
                                ". Answer again with one valid action in the required format.");
        }
        if (!chosen) {
            throw Error(ErrorCode::malformed_action_text, "explorer produced no usable action");
        }

        const StepResult result = env_.step(chosen->action);
        const int index = step_count() + 1;
        std::string summary = action_summary(index, chosen->reason, chosen->action);
        record(before, chosen->action, result, chosen->reason, std::move(summary));
        warning_.reset();

        auto& counter = out_.budget.cyclic[current_app()];
        switch (detect_cycle(memory_, cfg_.cycle_window)) {
        case CycleSignal::repeat:
            ++counter;
            return handle_cycle(index);
        case CycleSignal::novel:
            counter = 0;
            break;
        case CycleSignal::none:
            break;
        }
        return true;
    }

    bool handle_cycle(int current_step)
    {
        const auto check = check_rollback(memory_, current_step, supervisor_, cfg_.temperature);
        if (check.unparseable) {
            out_.events.push_back("step " + std::to_string(current_step) +
                                  ": unparseable supervisor decision treated as no backtrack");
        }
        if (check.invalid_target) {
            out_.events.push_back("step " + std::to_string(current_step) + ": invalid backtrack target ignored");
        }
        if (!check.directive) {
            return true;
        }
        // Never roll back across an app switch: earlier apps are closed.
        const int target = std::max(check.directive->target_step, segment_start_);
        if (target >= current_step) {
            out_.events.push_back("step " + std::to_string(current_step) + ": backtrack target outside current app");
            return true;
        }
        if (out_.rollbacks >= cfg_.max_rollbacks) {
            out_.events.push_back("rollback cap of " + std::to_string(cfg_.max_rollbacks) + " reached at step " +
                                  std::to_string(current_step) + "; trajectory ends");
            return false;
        }
        ++out_.rollbacks;
        std::vector<std::string> failed;
        for (const auto& r : memory_.records) {
            if (r.step > target) {
                failed.push_back(r.summary);
            }
        }
        env_.restore(snapshots_[static_cast<std::size_t>(target)]);
        snapshots_.resize(static_cast<std::size_t>(target) + 1);
        memory_.truncate_after(target);
        const auto keep = static_cast<std::size_t>(target);
        out_.trajectory.steps.resize(keep);
        out_.before.resize(keep);
        out_.reasons.resize(keep);
        out_.no_effect.resize(keep);

        warning_ = prompts::fill(prompts::kErrorWarning, {
                                                             {"STEP_NUM", std::to_string(current_step)},
                                                             {"BACKTRACK_STEP", std::to_string(target)},
                                                             {"BACKTRACKED_ACTIONS", join(failed, "; ")},
                                                         });
        out_.events.push_back("rollback from step " + std::to_string(current_step) + " to step " +
                              std::to_string(target));
        if (update_weights(out_.budget, current_app())) {
            out_.events.push_back("penalized " + current_app());
        }
        reallocate(current_);
        return true;
    }

    const DifficultyParams& params_;
    Environment& env_;
    ChatClient& explorer_;
    ChatClient& supervisor_;
    const McgConfig& cfg_;
    GenerationResult out_;
    WorkingMemory memory_;
    std::vector<SnapshotToken> snapshots_;  // [k] = state after step k
    std::size_t current_ = 0;
    int consumed_ = 0;
    int segment_start_ = 1;
    std::optional<std::string> warning_;
};

}  // namespace

GenerationResult run_trajectory(const std::string& id, const DifficultyParams& params, Environment& env,
                                ChatClient& explorer, ChatClient& supervisor, const McgConfig& cfg)
{
    return Generator(id, params, env, explorer, supervisor, cfg).run();
}

std::optional<std::string> synthesize_thought(const Observation& before, const Action& action,
                                              const Observation& after, ChatClient& synthesizer, double temperature,
                                              bool attach_screenshots)
{
    const UiElement* element = target_element(before, action);
    nlohmann::ordered_json element_json = nullptr;
    if (element != nullptr) {
        element_json = {{"index", element->index}, {"type", element->type}, {"label", element->label}};
    }
    const std::string prompt = prompts::fill(prompts::kThoughtSynthesis, {
                                                                             {"APP_NAME", before.app},
                                                                             {"ACTION_JSON", action_to_json(action).dump()},
                                                                             {"ELEMENT_JSON", element_json.dump()},
                                                                         });
    ChatRequest request = ChatRequest::user_prompt(prompt, temperature);
    if (attach_screenshots) {
        request.messages.back().parts.emplace_back(png(render_screenshot_png(before)));
        request.messages.back().parts.emplace_back(png(render_screenshot_png(after)));
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto reply = synthesizer.complete(request);
        auto j = parse_json_object(reply.text);
        if (j && j->contains("reasoning") && (*j)["reasoning"].is_string()) {
            return (*j)["reasoning"].get<std::string>();
        }
        request = reask(request, reply.text,
                        "Return ONLY a valid JSON object with the keys \"reasoning\" and \"analysis\".");
    }
    return std::nullopt;
}

std::vector<std::string> required_input_texts(const Trajectory& t)
{
    std::vector<std::string> texts;
    for (const auto& s : t.steps) {
        if (s.action.type == ActionType::input_text && s.action.text && !s.action.text->empty() &&
            std::find(texts.begin(), texts.end(), *s.action.text) == texts.end()) {
            texts.push_back(*s.action.text);
        }
    }
    return texts;
}

std::optional<std::string> missing_instruction_term(const Trajectory& t, std::string_view instruction)
{
    for (const auto& app : t.params.app_set) {
        if (instruction.find(app) == std::string_view::npos) {
            return app;
        }
    }
    for (const auto& text : required_input_texts(t)) {
        if (instruction.find(text) == std::string_view::npos) {
            return text;
        }
    }
    return std::nullopt;
}

std::string synthesize_instruction(const Trajectory& t, DifficultyLevel iud, ChatClient& synthesizer,
                                   double temperature)
{
    std::string steps;
    for (const auto& s : t.steps) {
        if (!s.thought) {
            throw Error(ErrorCode::invalid_argument, "step " + std::to_string(s.index) + " has no thought");
        }
        steps += "\nStep " + std::to_string(s.index) + " [" + s.app + "]: action=" + action_compact(s.action) +
                 " thought=" + *s.thought;
    }
    const auto texts = required_input_texts(t);
    const std::string prompt = prompts::fill(
        prompts::kInstructionSynthesis,
        {
            {"APP_HINT", join(t.params.app_set, ", ")},
            {"REQUIRED_INPUT_TEXTS", texts.empty() ? std::string("None") : nlohmann::json(texts).dump()},
            {"INSTRUCTION_DIFFICULTY_PROMPT", std::string(prompts::instruction_understanding(iud))},
            {"STEPS", steps.empty() ? std::string("None") : steps},
        });
    ChatRequest request = ChatRequest::user_prompt(prompt, temperature);
    std::string problem;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const auto reply = synthesizer.complete(request);
        auto j = parse_json_object(reply.text);
        if (!j || !j->contains("task_instruction") || !(*j)["task_instruction"].is_string()) {
            problem = "the answer is not a JSON object with a \"task_instruction\" string";
        } else {
            const auto instruction = (*j)["task_instruction"].get<std::string>();
            if (auto missing = missing_instruction_term(t, instruction)) {
                problem = "\"task_instruction\" must contain \"" + *missing + "\" verbatim";
            } else {
                return instruction;
            }
        }
        request = reask(request, reply.text, "Your answer was rejected: " + problem + ". Try again.");
    }
    throw Error(ErrorCode::constraint_violated, "trajectory " + t.id + ": " + problem);
}

}  // namespace mobilegen
