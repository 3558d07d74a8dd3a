#include "mobilegen/quality.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/prompts.hpp"
#include "mobilegen/render.hpp"

#include <cctype>
#include <charconv>
#include <set>

namespace mobilegen {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<int> parse_int(std::string_view s)
{
    s = trim(s);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

int checked_score(std::optional<int> v, std::string_view raw)
{
    if (!v) {
        throw Error(ErrorCode::invalid_judge_output, "score is not an integer: " + std::string(raw.substr(0, 40)));
    }
    if (*v < 1 || *v > 10) {
        throw Error(ErrorCode::invalid_judge_output, "score " + std::to_string(*v) + " outside [1, 10]");
    }
    return *v;
}

bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

ChatRequest reask(ChatRequest request, const std::string& rejected, const std::string& complaint)
{
    request.messages.push_back(ChatMessage::text(Role::assistant, rejected));
    request.messages.push_back(ChatMessage::text(Role::user, complaint));
    return request;
}

template <typename Parse>
Judgement ask_with_retry(ChatClient& judge, ChatRequest request, Parse parse, const std::string& complaint)
{
    for (int attempt = 0;; ++attempt) {
        const auto reply = judge.complete(request);
        try {
            return parse(reply.text);
        } catch (const Error& e) {
            if (attempt == 1) {
                throw;
            }
            request = reask(request, reply.text, std::string(e.what()) + ". " + complaint);
        }
    }
}

std::string screen_key(const Observation& obs)
{
    return obs.app + "/" + obs.screen_id;
}

}  // namespace

Judgement parse_step_judgement(std::string_view text)
{
    auto object = extract_json_object(text);
    if (!object) {
        throw Error(ErrorCode::invalid_judge_output, "no JSON object in judge output");
    }
    auto j = nlohmann::json::parse(*object, nullptr, false);
    if (j.is_discarded()) {
        j = nlohmann::json::parse(normalize_json_like(*object), nullptr, false);
    }
    if (j.is_discarded() || !j.is_object() || !j.contains("score")) {
        throw Error(ErrorCode::invalid_judge_output, "judge output lacks a score");
    }
    const auto& s = j["score"];
    std::optional<int> score;
    if (s.is_number_integer()) {
        const auto v = s.get<long long>();
        score = v >= -1000 && v <= 1000 ? std::optional<int>(static_cast<int>(v)) : std::optional<int>(1000);
    } else if (s.is_number_float() && s.get<double>() == static_cast<double>(static_cast<long long>(s.get<double>()))) {
        score = static_cast<int>(std::clamp(s.get<double>(), -1000.0, 1000.0));
    } else if (s.is_string()) {
        score = parse_int(s.get<std::string>());
    }
    Judgement out;
    out.score = checked_score(score, s.dump());
    if (j.contains("reason") && j["reason"].is_string()) {
        out.reason = j["reason"].get<std::string>();
    }
    return out;
}

Judgement parse_trajectory_judgement(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = trim(text.substr(pos, nl - pos));
        if (!line.empty()) {
            lines.push_back(line);
        }
        pos = nl + 1;
    }
    if (lines.size() != 2 || !starts_with(lines[0], "Reason:") || !starts_with(lines[1], "Score:")) {
        throw Error(ErrorCode::invalid_judge_output, "expected exactly two lines 'Reason:' then 'Score:'");
    }
    Judgement out;
    out.reason = std::string(trim(lines[0].substr(7)));
    const auto raw = lines[1].substr(6);
    out.score = checked_score(parse_int(raw), raw);
    return out;
}

Judgement judge_step(const StepContext& ctx, ChatClient& judge, const JudgeOptions& opts)
{
    nlohmann::ordered_json element = nullptr;
    if (ctx.element != nullptr) {
        element = {{"index", ctx.element->index}, {"type", ctx.element->type}, {"label", ctx.element->label}};
    }
    const std::string prompt = prompts::fill(prompts::kStepJudge, {
                                                                      {"TASK_INSTRUCTION", ctx.instruction},
                                                                      {"ACTION_JSON", action_to_json(ctx.action).dump()},
                                                                      {"REASONING", ctx.reasoning},
                                                                      {"ELEMENT_JSON", element.dump()},
                                                                  });
    ChatRequest request = ChatRequest::user_prompt(prompt, opts.temperature);
    if (opts.attach_screenshots) {
        if (ctx.before != nullptr) {
            request.messages.back().parts.emplace_back(ImagePayload{"image/png", render_screenshot_png(*ctx.before)});
        }
        if (ctx.after != nullptr) {
            request.messages.back().parts.emplace_back(ImagePayload{"image/png", render_screenshot_png(*ctx.after)});
        }
    }
    return ask_with_retry(judge, std::move(request), parse_step_judgement,
                          "Output ONLY one JSON object with an integer \"score\" in 1-10 and a \"reason\".");
}

std::string TrajectoryStats::render() const
{
    return "steps=" + std::to_string(steps) + ", apps=" + std::to_string(apps) +
           ", distinct_screens=" + std::to_string(distinct_screens) +
           ", repeated_actions=" + std::to_string(repeated_actions) +
           ", no_effect_steps=" + std::to_string(no_effect_steps);
}

TrajectoryStats trajectory_stats(const Trajectory& t, const std::vector<Observation>& before,
                                 const Observation& final_observation)
{
    if (before.size() != t.steps.size()) {
        throw Error(ErrorCode::invalid_argument, "one observation per step is required");
    }
    TrajectoryStats s;
    s.steps = static_cast<int>(t.steps.size());
    s.apps = static_cast<int>(apps_in_steps(t).size());
    std::set<std::string> screens;
    std::set<std::string> pairs;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        screens.insert(screen_key(before[i]));
        if (!pairs.insert(screen_key(before[i]) + "|" + action_compact(t.steps[i].action)).second) {
            ++s.repeated_actions;
        }
        const Observation& after = i + 1 < before.size() ? before[i + 1] : final_observation;
        if (t.steps[i].action.type != ActionType::wait && after == before[i]) {
            ++s.no_effect_steps;
        }
    }
    screens.insert(screen_key(final_observation));
    s.distinct_screens = static_cast<int>(screens.size());
    return s;
}

Judgement judge_trajectory(const Trajectory& t, const std::vector<Observation>& before,
                           const Observation& final_observation, ChatClient& judge, const JudgeOptions& opts)
{
    if (t.instruction.empty() || t.steps.empty()) {
        throw Error(ErrorCode::invalid_argument, "trajectory " + t.id + " needs an instruction and steps to be judged");
    }
    const auto stats = trajectory_stats(t, before, final_observation);
    const std::size_t latest = std::min<std::size_t>(t.steps.size(), 5);
    std::string steps;
    for (std::size_t i = t.steps.size() - latest; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        steps += "\nStep " + std::to_string(s.index) + " [" + s.app + "]: " + action_compact(s.action);
        if (s.summary) {
            steps += " - " + *s.summary;
        }
    }

    // the last N screens, ending with the final state
    std::vector<const Observation*> shots;
    shots.push_back(&final_observation);
    for (std::size_t i = before.size(); i > 0 && static_cast<int>(shots.size()) < opts.screenshots; --i) {
        shots.push_back(&before[i - 1]);
    }
    const int shown = std::min(opts.screenshots, static_cast<int>(shots.size()));

    const std::string prompt = prompts::fill(prompts::kTrajectoryJudge, {
                                                                            {"TASK_INSTRUCTION", t.instruction},
                                                                            {"STATS", stats.render()},
                                                                            {"LATEST_STEPS", steps},
                                                                            {"NUM_SCREENSHOTS", std::to_string(shown)},
                                                                        });
    ChatRequest request = ChatRequest::user_prompt(prompt, opts.temperature);
    if (opts.attach_screenshots) {
        for (int i = shown - 1; i >= 0; --i) {
            request.messages.back().parts.emplace_back(
                ImagePayload{"image/png", render_screenshot_png(*shots[static_cast<std::size_t>(i)])});
        }
    }
    return ask_with_retry(judge, std::move(request), parse_trajectory_judgement,
                          "Output ONLY two lines: 'Reason: <short>' then 'Score: <integer 1-10>'.");
}

nlohmann::ordered_json report_to_json(const QualityReport& r)
{
    nlohmann::ordered_json j;
    j["trajectory_id"] = r.trajectory_id;
    j["step_scores"] = nlohmann::ordered_json::array();
    for (const auto& s : r.step_scores) {
        j["step_scores"].push_back({{"index", s.index}, {"score", s.score}, {"reason", s.reason}});
    }
    j["trajectory_score"] = r.trajectory_score;
    j["trajectory_reason"] = r.trajectory_reason;
    j["kept"] = r.kept;
    return j;
}

QualityReport report_from_json(const nlohmann::json& j)
{
    try {
        QualityReport r;
        r.trajectory_id = j.at("trajectory_id").get<std::string>();
        for (const auto& s : j.at("step_scores")) {
            r.step_scores.push_back(
                {s.at("index").get<int>(), s.at("score").get<int>(), s.at("reason").get<std::string>()});
        }
        r.trajectory_score = j.at("trajectory_score").get<int>();
        r.trajectory_reason = j.at("trajectory_reason").get<std::string>();
        r.kept = j.value("kept", false);
        if (r.trajectory_score < 1 || r.trajectory_score > 10) {
            throw Error(ErrorCode::schema_violation, "trajectory score outside [1, 10]");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("quality report: ") + e.what());
    }
}

std::vector<std::string> filter_dataset(const std::vector<QualityReport>& reports, int threshold)
{
    if (threshold < 1 || threshold > 10) {
        throw Error(ErrorCode::invalid_argument, "threshold must lie in [1, 10]");
    }
    std::vector<std::string> kept;
    for (const auto& r : reports) {
        if (r.trajectory_score > threshold) {
            kept.push_back(r.trajectory_id);
        }
    }
    return kept;
}

}  // namespace mobilegen
