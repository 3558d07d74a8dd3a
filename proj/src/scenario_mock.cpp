#include "mobilegen/scenario_mock.hpp"

#include "mobilegen/action.hpp"
#include "mobilegen/mcg.hpp"
#include "mobilegen/prompts.hpp"
#include "mobilegen/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobilegen {

namespace {

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

bool contains(std::string_view hay, std::string_view needle)
{
    return hay.find(needle) != std::string_view::npos;
}

// Rest of the first line that starts with `prefix` (searching from `from`).
std::optional<std::string> line_after(std::string_view text, std::string_view prefix, bool last = false)
{
    std::optional<std::string> found;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(pos, nl - pos);
        while (!line.empty() && (line.front() == ' ' || line.front() == '-')) {
            line.remove_prefix(1);
        }
        if (line.substr(0, prefix.size()) == prefix) {
            auto rest = line.substr(prefix.size());
            while (!rest.empty() && rest.front() == ' ') {
                rest.remove_prefix(1);
            }
            found = std::string(rest);
            if (!last) {
                return found;
            }
        }
        pos = nl + 1;
    }
    return found;
}

std::string block_after(std::string_view text, std::string_view marker, std::string_view until = {})
{
    auto pos = text.rfind(marker);
    if (pos == std::string_view::npos) {
        return {};
    }
    auto rest = text.substr(pos + marker.size());
    if (!until.empty()) {
        auto end = rest.find(until);
        if (end != std::string_view::npos) {
            rest = rest.substr(0, end);
        }
    }
    return std::string(rest);
}

struct Element {
    int index = 0;
    std::string type;
    std::string label;
};

// Lines of the form: [3] button "Save" (l, t, r, b)
std::vector<Element> parse_elements(std::string_view text)
{
    std::vector<Element> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.size() < 4 || line.front() != '[') {
            continue;
        }
        auto close = line.find("] ");
        if (close == std::string_view::npos) {
            continue;
        }
        Element e;
        try {
            e.index = std::stoi(std::string(line.substr(1, close - 1)));
        } catch (const std::exception&) {
            continue;
        }
        auto rest = line.substr(close + 2);
        auto q1 = rest.find('"');
        auto q2 = q1 == std::string_view::npos ? q1 : rest.find('"', q1 + 1);
        if (q2 == std::string_view::npos) {
            continue;
        }
        e.type = std::string(rest.substr(0, q1 > 0 ? q1 - 1 : 0));
        e.label = std::string(rest.substr(q1 + 1, q2 - q1 - 1));
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<std::string> quoted_spans(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto a = text.find('"', pos);
        if (a == std::string_view::npos) {
            break;
        }
        auto b = text.find('"', a + 1);
        if (b == std::string_view::npos) {
            break;
        }
        out.emplace_back(text.substr(a + 1, b - a - 1));
        pos = b + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? std::string(sep) : std::string()) + items[i];
    }
    return out;
}

std::vector<std::string> split(std::string_view s, std::string_view sep)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = s.find(sep, pos);
        out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + sep.size();
    }
    return out;
}

std::string single_quoted(const Action& a)
{
    std::string s = action_to_json(a).dump();
    std::replace(s.begin(), s.end(), '"', '\'');
    return s;
}

constexpr std::array<std::string_view, 12> kTexts = {
    "buy milk",     "meeting at 5", "weekly report", "call mom",   "pizza night", "tokyo trip",
    "gym at 7 am",  "pay rent",     "book club",     "new recipe", "dentist",     "flight AB123",
};

std::string answer_explorer(std::string_view prompt)
{
    const std::uint64_t h = fnv1a(prompt);
    const std::string app = line_after(prompt, "Now you are in the app:").value_or("");
    const std::string screen = line_after(prompt, "Screen:").value_or("");
    const auto elements = parse_elements(block_after(prompt, "Screen:", "Now you are in the app:"));
    const bool warned = contains(prompt, "[WARNING] You were backtracked");

    Action action;
    std::string reason;
    if (screen.substr(0, app.size() + 1) != app + "/") {
        action = Action::open_app(app);
        reason = "I am not inside " + app + ", so I open it to continue.";
    } else if (warned && h % 2 == 0) {
        action = Action::simple(ActionType::navigate_back);
        reason = "The last attempts went in circles, so I go back to try another part of the app.";
    } else if (elements.empty() || h % 11 == 0) {
        action = Action::scroll(h % 2 ? Direction::down : Direction::up);
        reason = std::string("I scroll ") + (h % 2 ? "down" : "up") + " to reveal more of the screen.";
    } else if (h % 13 == 1 && !contains(screen, "/home")) {
        action = Action::simple(ActionType::navigate_back);
        reason = "This screen is done, so I return to the previous one.";
    } else {
        const auto& e = elements[(h >> 8) % elements.size()];
        if (e.type == "input") {
            const std::string text(kTexts[(h >> 20) % kTexts.size()]);
            action = Action::input_text(text, ElementIndex{e.index});
            reason = "I type \"" + text + "\" into the \"" + e.label + "\" field.";
        } else if (e.type == "list" && (h >> 30) % 4 == 0) {
            action = Action::long_press(ElementIndex{e.index});
            reason = "I long press the \"" + e.label + "\" item to see its options.";
        } else {
            action = Action::click(ElementIndex{e.index});
            reason = "I tap the \"" + e.label + "\" " + (e.type.empty() ? "element" : e.type) + " to open it.";
        }
    }
    return "Reason: " + reason + "\nAction: " + single_quoted(action);
}

std::string answer_budget(std::string_view prompt)
{
    const auto apps = split(line_after(prompt, "Target apps:").value_or(""), ", ");
    const int total = std::stoi(line_after(prompt, "Total steps:").value_or("0"));
    std::map<std::string, double> weights;
    auto w = line_after(prompt, "App allocation weight:").value_or("");
    auto object = extract_json_object(w);
    if (object) {
        auto j = nlohmann::json::parse(*object, nullptr, false);
        if (j.is_object()) {
            for (const auto& [k, v] : j.items()) {
                if (v.is_number()) {
                    weights[k] = v.get<double>();
                }
            }
        }
    }
    nlohmann::ordered_json out;
    for (const auto& [app, n] : fallback_allocation(apps, total, weights)) {
        out[app] = n;
    }
    // keep the pending-set order of the prompt
    nlohmann::ordered_json ordered;
    for (const auto& app : apps) {
        ordered[app] = out[app];
    }
    return ordered.dump();
}

std::string answer_error_detection(std::string_view prompt)
{
    struct Rec {
        int step;
        std::string action;
    };
    std::vector<Rec> recs;
    std::size_t pos = 0;
    const auto memory = block_after(prompt, "Recent step records:", "Current step:");
    while (pos < memory.size()) {
        auto nl = memory.find('\n', pos);
        if (nl == std::string::npos) {
            nl = memory.size();
        }
        std::string_view line(memory.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.substr(0, 5) != "Step ") {
            continue;
        }
        auto a = line.find("| action: ");
        if (a == std::string_view::npos) {
            continue;
        }
        auto act = line.substr(a + 10);
        if (auto p = act.find(" (no effect)"); p != std::string_view::npos) {
            act = act.substr(0, p);
        }
        recs.push_back({std::atoi(std::string(line.substr(5)).c_str()), std::string(act)});
    }
    if (recs.size() >= 3) {
        const auto n = recs.size();
        if (recs[n - 1].action == recs[n - 2].action && recs[n - 2].action == recs[n - 3].action) {
            const int target = std::max(1, recs[n - 3].step - 1);
            return "backtrack to step " + std::to_string(target);
        }
    }
    return "no backtrack needed";
}

std::string answer_history(std::string_view prompt)
{
    const std::string app = line_after(prompt, "Current app:").value_or("the app");
    const auto memory = block_after(prompt, "Recent step records:", "Current app:");
    int steps = 0;
    std::string last;
    for (const auto& line : split(memory, "\n")) {
        if (line.rfind("Step ", 0) == 0) {
            ++steps;
            auto colon = line.find(": ");
            auto bar = line.find(" | action:");
            if (colon != std::string::npos && bar != std::string::npos && bar > colon) {
                last = line.substr(colon + 2, bar - colon - 2);
            }
        }
    }
    return "The agent has taken " + std::to_string(steps) + " steps and is now exploring " + app + ". " +
           (last.empty() ? std::string() : "Most recently: " + last);
}

std::string answer_action_summary(std::string_view prompt)
{
    std::string reason = line_after(prompt, "Agent's Reasoning:").value_or("");
    if (reason.empty()) {
        reason = "Performed " + line_after(prompt, "Action:").value_or("an action") + ".";
    }
    return reason;
}

std::string answer_thought(std::string_view prompt)
{
    const std::string app = line_after(prompt, "App:").value_or("the app");
    const auto action_json = nlohmann::json::parse(line_after(prompt, "Action JSON:").value_or("{}"), nullptr, false);
    const auto element = nlohmann::json::parse(line_after(prompt, "Target element (if any):").value_or("null"),
                                               nullptr, false);
    std::string label = element.is_object() ? element.value("label", "") : "";
    std::string type = action_json.is_object() ? action_json.value("action_type", "") : "";
    std::string reasoning;
    if (type == "click") {
        reasoning = label.empty() ? "I tap this spot to move on in " + app + "."
                                  : "I tap \"" + label + "\" because it leads where I need to go in " + app + ".";
    } else if (type == "long_press") {
        reasoning = "I long press \"" + label + "\" to open its extra options.";
    } else if (type == "input_text") {
        reasoning = "I enter \"" + action_json.value("text", "") + "\" in the \"" + label + "\" field.";
    } else if (type == "scroll") {
        reasoning = "I scroll " + action_json.value("direction", "down") + " to look for more options in " + app + ".";
    } else if (type == "open_app") {
        reasoning = "I open " + action_json.value("app_name", app) + " to carry on with the task there.";
    } else if (type == "navigate_back") {
        reasoning = "I go back because this screen is not the one I need.";
    } else if (type == "navigate_home") {
        reasoning = "I return to the home screen to start from a clean state.";
    } else {
        reasoning = "I " + (type.empty() ? std::string("wait") : type) + " to let the screen settle.";
    }
    nlohmann::ordered_json out{{"reasoning", reasoning}, {"analysis", "derived from the action and target"}};
    return out.dump();
}

DifficultyLevel iud_level(std::string_view prompt)
{
    for (auto level : kAllLevels) {
        if (contains(prompt, prompts::instruction_understanding(level))) {
            return level;
        }
    }
    return DifficultyLevel::easy;
}

std::string answer_instruction(std::string_view prompt)
{
    const auto apps = split(line_after(prompt, "App name requirement: \"task_instruction\" MUST explicitly mention "
                                               "the app name(s) exactly as written:")
                                .value_or(""),
                            ", ");
    std::vector<std::string> texts;
    const auto raw_texts = line_after(prompt, "Required typed texts (verbatim, do NOT modify):").value_or("None");
    if (raw_texts != "None") {
        auto j = nlohmann::json::parse(raw_texts, nullptr, false);
        if (j.is_array()) {
            for (const auto& t : j) {
                texts.push_back(t.get<std::string>());
            }
        }
    }
    // labels of tapped elements, from the synthesized thoughts
    std::vector<std::string> labels;
    const auto trace = block_after(prompt, "Interaction trace:", "\nTask:");
    for (const auto& line : split(trace, "\n")) {
        if (line.find("\"action_type\":\"click\"") == std::string::npos) {
            continue;
        }
        auto t = line.find("thought=");
        if (t == std::string::npos) {
            continue;
        }
        auto q = quoted_spans(std::string_view(line).substr(t));
        if (!q.empty() && std::find(labels.begin(), labels.end(), q.front()) == labels.end()) {
            labels.push_back(q.front());
        }
    }

    std::vector<std::string> quoted_texts;
    for (const auto& t : texts) {
        quoted_texts.push_back("\"" + t + "\"");
    }
    std::string instruction;
    switch (iud_level(prompt)) {
    case DifficultyLevel::easy: {
        std::vector<std::string> parts;
        for (std::size_t i = 0; i < labels.size() && i < 6; ++i) {
            parts.push_back("tap \"" + labels[i] + "\"");
        }
        for (const auto& t : quoted_texts) {
            parts.push_back("type " + t);
        }
        instruction = "In " + join(apps, " and then ") + ", " +
                      (parts.empty() ? std::string("look around the main screens") : join(parts, ", ")) + ".";
        break;
    }
    case DifficultyLevel::medium:
        instruction = "Use " + join(apps, " and ") + " to get to " +
                      (labels.empty() ? std::string("the main sections") : "\"" + labels.back() + "\"") +
                      (quoted_texts.empty() ? std::string() : " and note down " + join(quoted_texts, ", ")) + ".";
        break;
    case DifficultyLevel::hard:
        instruction = "I want my day organised with " + join(apps, " plus ") +
                      (quoted_texts.empty() ? std::string() : "; make sure " + join(quoted_texts, " and ") +
                                                                  " end up saved") +
                      ".";
        break;
    }
    nlohmann::ordered_json out{{"task_instruction", instruction}, {"analysis", "built from the trace"}};
    return out.dump();
}

std::string answer_student(std::string_view prompt, std::uint64_t seed)
{
    const std::uint64_t h = mix64(fnv1a(prompt) ^ mix64(seed + 1));
    const std::string instruction = line_after(prompt, "Task instruction:", true).value_or("");
    const auto elements = parse_elements(block_after(prompt, "Accessibility tree:"));
    const auto mentions = quoted_spans(instruction);

    std::vector<const Element*> candidates;
    for (const auto& e : elements) {
        if (std::find(mentions.begin(), mentions.end(), e.label) != mentions.end()) {
            candidates.push_back(&e);
        }
    }
    Action action;
    std::string reason;
    if (!candidates.empty() && h % 5 != 0) {
        const auto& e = *candidates[(h >> 8) % candidates.size()];
        if (e.type == "input") {
            std::string text;
            for (const auto& m : mentions) {
                bool is_label = false;
                for (const auto& other : elements) {
                    is_label = is_label || other.label == m;
                }
                if (!is_label) {
                    text = m;
                    break;
                }
            }
            action = Action::input_text(text.empty() ? e.label : text, ElementIndex{e.index});
            reason = "The instruction asks for text in \"" + e.label + "\".";
        } else {
            action = Action::click(ElementIndex{e.index});
            reason = "The instruction mentions \"" + e.label + "\".";
        }
    } else if (!elements.empty() && h % 3 != 0) {
        const auto& e = elements[(h >> 16) % elements.size()];
        action = Action::click(Point{(h >> 24) % 1080 * 1.0, (h >> 36) % 2400 * 1.0});
        if (h % 2 == 0) {
            action = Action::click(ElementIndex{e.index});
        }
        reason = "I try an element that may lead forward.";
    } else {
        switch ((h >> 40) % 3) {
        case 0:
            action = Action::scroll(Direction::down);
            break;
        case 1:
            action = Action::simple(ActionType::navigate_back);
            break;
        default:
            action = Action::simple(ActionType::wait);
            break;
        }
        reason = "Nothing obvious to do, so I try a generic action.";
    }
    return "Reason: " + reason + "\nAction: " + single_quoted(action);
}

std::string answer_step_judge(std::string_view prompt)
{
    const std::uint64_t h = fnv1a(prompt);
    const std::string reasoning = line_after(prompt, "Agent Reasoning:").value_or("");
    const auto element = nlohmann::json::parse(line_after(prompt, "Target element info:").value_or("null"), nullptr,
                                               false);
    int score = 8;
    std::string why = "action plausibly advances the task";
    if (reasoning.empty()) {
        score = 4;
        why = "no reasoning given for the action";
    } else if (element.is_object() && contains(reasoning, element.value("label", "\x01"))) {
        score = 9 + static_cast<int>(h % 2);
        why = "reasoning names the element that was acted on";
    }
    nlohmann::ordered_json out{{"score", score}, {"reason", why}};
    return out.dump();
}

int stat(std::string_view stats, std::string_view key)
{
    auto pos = stats.find(std::string(key) + "=");
    if (pos == std::string_view::npos) {
        return 0;
    }
    return std::atoi(std::string(stats.substr(pos + key.size() + 1)).c_str());
}

std::string answer_trajectory_judge(std::string_view prompt)
{
    const std::string stats = line_after(prompt, "Trajectory Stats (computed):").value_or("");
    const int steps = std::max(1, stat(stats, "steps"));
    const double repeated = static_cast<double>(stat(stats, "repeated_actions")) / steps;
    const double idle = static_cast<double>(stat(stats, "no_effect_steps")) / steps;
    int score = 10 - static_cast<int>(std::lround(5.0 * repeated)) - static_cast<int>(std::lround(4.0 * idle));
    if (stat(stats, "distinct_screens") < 3) {
        score -= 1;
    }
    score = std::clamp(score, 1, 10);
    std::string reason = score >= 9   ? "coherent progress with little redundancy"
                         : score >= 6 ? "useful progress but some repeated or idle steps"
                                      : "mostly loops and idle steps";
    return "Reason: " + reason + "\nScore: " + std::to_string(score);
}

}  // namespace

std::string scenario_answer(const ChatRequest& request)
{
    std::string prompt;
    for (const auto& m : request.messages) {
        if (m.role == Role::user) {
            for (const auto& part : m.parts) {
                if (const auto* s = std::get_if<std::string>(&part)) {
                    prompt = *s;
                    break;
                }
            }
            break;
        }
    }
    if (contains(prompt, "Step budget for this app:")) {
        return answer_explorer(prompt);
    }
    if (contains(prompt, "planning step budgets")) {
        return answer_budget(prompt);
    }
    if (contains(prompt, "monitoring agent behavior for loops")) {
        return answer_error_detection(prompt);
    }
    if (contains(prompt, "summarizing the agent's recent trajectory history")) {
        return answer_history(prompt);
    }
    if (contains(prompt, "description of what the agent did in this step")) {
        return answer_action_summary(prompt);
    }
    if (contains(prompt, "writing training data")) {
        return answer_thought(prompt);
    }
    if (contains(prompt, "writing the user's high-level task instruction")) {
        return answer_instruction(prompt);
    }
    if (contains(prompt, "You are an Android GUI agent.")) {
        return answer_student(prompt, request.seed.value_or(0));
    }
    if (contains(prompt, "SINGLE-STEP Android GUI agent data")) {
        return answer_step_judge(prompt);
    }
    if (contains(prompt, "output ONE final reward score")) {
        return answer_trajectory_judge(prompt);
    }
    return "I cannot help with that request.";
}

std::unique_ptr<MockClient> make_scenario_client()
{
    auto client = std::make_unique<MockClient>();
    client->keep_requests(false);
    client->on([](const ChatRequest&) { return true; }, MockClient::Generator(scenario_answer));
    return client;
}

}  // namespace mobilegen
