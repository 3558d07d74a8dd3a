#include "mobilegen/profiling.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/prompts.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace mobilegen {

std::pair<double, double> semantic_capability(const std::vector<StepOutcome>& outcomes)
{
    double passed = 0.0;
    double int_sum = 0.0;
    double ins_sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.passed) {
            passed += 1.0;
            int_sum += o.m_int;
            ins_sum += o.m_ins;
        }
    }
    if (passed == 0.0) {
        throw Error(ErrorCode::no_correct_steps, "no step passed; semantic capability undefined");
    }
    return {int_sum / passed, ins_sum / passed};
}

std::map<std::string, double> normalize_vulnerabilities(const std::map<std::string, double>& v)
{
    std::map<std::string, double> out;
    if (v.empty()) {
        return out;
    }
    auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end(),
                                              [](const auto& a, const auto& b) { return a.second < b.second; });
    const double lo = lo_it->second;
    const double hi = hi_it->second;
    for (const auto& [app, value] : v) {
        out[app] = hi > lo ? (value - lo) / (hi - lo) : 0.5;
    }
    return out;
}

CapabilityProfile compute_profile(const std::vector<StepOutcome>& outcomes)
{
    if (outcomes.empty()) {
        throw Error(ErrorCode::empty_dataset, "no step outcomes to profile");
    }

    struct Tally {
        int steps = 0;
        int passed = 0;
    };
    // trajectory -> app -> tally, plus the global per-app tally
    std::map<std::string, std::map<std::string, Tally>> per_traj;
    std::map<std::string, Tally> per_app;
    double total_passed = 0.0;
    for (const auto& o : outcomes) {
        auto& t = per_traj[o.trajectory_id][o.app];
        auto& a = per_app[o.app];
        ++t.steps;
        ++a.steps;
        if (o.passed) {
            ++t.passed;
            ++a.passed;
            total_passed += 1.0;
        }
    }

    CapabilityProfile p;
    p.trajectories = per_traj.size();
    p.steps = outcomes.size();
    const double n = static_cast<double>(per_traj.size());
    p.c_d = total_passed / n;

    double breadth = 0.0;
    for (const auto& [id, apps] : per_traj) {
        for (const auto& [app, t] : apps) {
            breadth += static_cast<double>(t.passed) / t.steps;
        }
    }
    p.c_b = breadth / n;

    for (const auto& [app, a] : per_app) {
        p.vulnerabilities[app] = static_cast<double>(a.steps - a.passed) / a.steps;
    }
    p.normalized_vulnerabilities = normalize_vulnerabilities(p.vulnerabilities);
    double sum = 0.0;
    for (const auto& [app, v] : p.normalized_vulnerabilities) {
        sum += v;
    }
    p.v_star = sum / static_cast<double>(p.normalized_vulnerabilities.size());

    try {
        std::tie(p.c_int, p.c_ins) = semantic_capability(outcomes);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::no_correct_steps) {
            throw;
        }
        p.c_int = kSemanticFallbackScore;
        p.c_ins = kSemanticFallbackScore;
        p.semantic_fallback = true;
    }
    return p;
}

nlohmann::ordered_json profile_to_json(const CapabilityProfile& p)
{
    nlohmann::ordered_json j;
    j["c_d"] = p.c_d;
    j["c_b"] = p.c_b;
    j["c_int"] = p.c_int;
    j["c_ins"] = p.c_ins;
    j["vulnerabilities"] = p.vulnerabilities;
    j["normalized_vulnerabilities"] = p.normalized_vulnerabilities;
    j["v_star"] = p.v_star;
    j["semantic_fallback"] = p.semantic_fallback;
    j["trajectories"] = p.trajectories;
    j["steps"] = p.steps;
    return j;
}

CapabilityProfile profile_from_json(const nlohmann::json& j)
{
    try {
        CapabilityProfile p;
        p.c_d = j.at("c_d").get<double>();
        p.c_b = j.at("c_b").get<double>();
        p.c_int = j.at("c_int").get<double>();
        p.c_ins = j.at("c_ins").get<double>();
        p.vulnerabilities = j.at("vulnerabilities").get<std::map<std::string, double>>();
        if (j.contains("normalized_vulnerabilities")) {
            p.normalized_vulnerabilities = j.at("normalized_vulnerabilities").get<std::map<std::string, double>>();
        } else {
            p.normalized_vulnerabilities = normalize_vulnerabilities(p.vulnerabilities);
        }
        p.v_star = j.at("v_star").get<double>();
        p.semantic_fallback = j.value("semantic_fallback", false);
        p.trajectories = j.value("trajectories", std::size_t{0});
        p.steps = j.value("steps", std::size_t{0});
        for (const auto& [app, v] : p.vulnerabilities) {
            if (v < 0.0 || v > 1.0) {
                throw Error(ErrorCode::schema_violation, "vulnerability of " + app + " outside [0, 1]");
            }
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("profile: ") + e.what());
    }
}

std::string describe_elements(const Observation& obs)
{
    std::string out;
    char box[96];
    for (const auto& e : obs.elements) {
        std::snprintf(box, sizeof box, " (%.0f, %.0f, %.0f, %.0f)", e.bbox.left, e.bbox.top, e.bbox.right,
                      e.bbox.bottom);
        out += "[" + std::to_string(e.index) + "] " + e.type + " \"" + e.label + "\"" + box;
        if (e.text) {
            out += " text=\"" + *e.text + "\"";
        }
        out += '\n';
    }
    if (out.empty()) {
        out = "(no elements)\n";
    }
    return out;
}

namespace {

std::string numbered(const std::vector<std::string>& items)
{
    if (items.empty()) {
        return "None";
    }
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += "\nStep " + std::to_string(i + 1) + ": " + items[i];
    }
    return out;
}

std::string joined_lines(const std::vector<std::string>& items)
{
    if (items.empty()) {
        return "None";
    }
    std::string out;
    for (const auto& s : items) {
        out += "\n" + s;
    }
    return out;
}

}  // namespace

ChatRequest student_request(const PriorStep& step, double temperature, std::uint64_t sample)
{
    const std::string prompt = prompts::fill(prompts::kStudentActionSelection,
                                             {
                                                 {"STUDENT_ROLE_PLAY_PROMPT_TEMPLATE", std::string(prompts::kStudentRole)},
                                                 {"HISTORY", numbered(step.history)},
                                                 {"TRAJECTORY_INSTRUCTION", step.instruction},
                                                 {"LATEST_STEPS", joined_lines(step.latest)},
                                                 {"UI_ELEMENTS", "\n" + describe_elements(step.observation)},
                                             });
    ChatRequest r = ChatRequest::user_prompt(prompt, temperature);
    if (!step.som_png.empty()) {
        r.messages.back().parts.emplace_back(ImagePayload{"image/png", step.som_png});
    }
    r.seed = sample;
    return r;
}

std::optional<Action> parse_student_action(std::string_view text)
{
    try {
        return parse_action_text(text).action;
    } catch (const Error&) {
    }
    try {
        auto object = extract_json_object(text);
        if (!object) {
            return std::nullopt;
        }
        auto j = nlohmann::json::parse(normalize_json_like(*object));
        Action a = action_from_json(j);
        check_action_fields(a);
        return a;
    } catch (const Error&) {
        return std::nullopt;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

std::vector<StepOutcome> evaluate_prior(ChatClient& model, const std::vector<PriorStep>& steps,
                                        const ProfilingOptions& opts)
{
    if (opts.k < 1) {
        throw Error(ErrorCode::invalid_argument, "Pass@K needs k >= 1");
    }
    opts.match.validate();

    std::vector<StepOutcome> outcomes(steps.size());
    auto evaluate_one = [&](const PriorStep& step) {
        StepOutcome o{step.trajectory_id, step.step_index, step.app, false, numeric_score(step.icd),
                      numeric_score(step.iud)};
        const auto geom = geometry_for(step.observation, step.ground_truth);
        for (int s = 0; s < opts.k; ++s) {
            ChatResponse reply;
            try {
                reply = model.complete(student_request(step, opts.temperature, static_cast<std::uint64_t>(s)));
            } catch (const Error& e) {
                throw Error(e.code(), "trajectory " + step.trajectory_id + " step " +
                                          std::to_string(step.step_index) + ": " + e.what());
            }
            auto action = parse_student_action(reply.text);
            if (action && !o.passed) {
                try {
                    o.passed = match_actions(*action, step.ground_truth, geom, opts.match);
                } catch (const Error&) {
                    // a prediction the matcher cannot place is simply wrong
                }
            }
        }
        return o;
    };
    detail::parallel_for(steps.size(), opts.max_concurrency,
                         [&](std::size_t i) { outcomes[i] = evaluate_one(steps[i]); });
    return outcomes;
}

}  // namespace mobilegen
