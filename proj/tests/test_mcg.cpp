#include "mobilegen/error.hpp"
#include "mobilegen/mcg.hpp"
#include "mobilegen/rng.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace mobilegen;
using test_support::simple_app;

namespace {

const char* kExplorerMarker = "Step budget for this app:";
const char* kBudgetMarker = "planning step budgets";
const char* kLoopMarker = "monitoring agent behavior for loops";

std::string act(const std::string& json)
{
    return "Reason: scripted\nAction: " + json;
}

const std::string kNext = act(R"({"action_type": "click", "index": 0})");
const std::string kStay = act(R"({"action_type": "click", "index": 1})");

// Supervisor that answers the budget question with garbage (forcing the
// proportional split), summarizes blandly and never backtracks unless given
// a scripted list of loop decisions.
void supervise(MockClient& m, std::vector<std::string> loop_answers = {})
{
    m.on(prompt_contains(kBudgetMarker), [](const ChatRequest&) { return std::string("no idea"); });
    if (!loop_answers.empty()) {
        m.on(prompt_contains(kLoopMarker), std::move(loop_answers));
    } else {
        m.on(prompt_contains(kLoopMarker), [](const ChatRequest&) { return std::string("No backtrack needed"); });
    }
    m.on([](const ChatRequest&) { return true; }, [](const ChatRequest&) { return std::string("did a step"); });
}

DifficultyParams params(int dot, std::vector<std::string> apps)
{
    const int bot = static_cast<int>(apps.size());
    return DifficultyParams{dot, bot, DifficultyLevel::easy, DifficultyLevel::easy, std::move(apps)};
}

// Forwards to the simulator and keeps every observation it hands out.
class RecordingEnv : public Environment {
public:
    explicit RecordingEnv(std::vector<AppGraph> g) : inner_(std::move(g)) {}

    Observation reset() override { return inner_.reset(); }
    Observation observe() const override { return inner_.observe(); }
    StepResult step(const Action& a) override
    {
        auto r = inner_.step(a);
        steps.push_back(observation_to_json(r.observation).dump());
        return r;
    }
    SnapshotToken snapshot() override { return inner_.snapshot(); }
    Observation restore(const SnapshotToken& t) override
    {
        auto o = inner_.restore(t);
        restores.push_back(observation_to_json(o).dump());
        return o;
    }
    std::vector<std::string> apps() const override { return inner_.apps(); }

    std::vector<std::string> steps;
    std::vector<std::string> restores;

private:
    SimulatedEnvironment inner_;
};

MemoryRecord rec(int step, std::string screen, std::string result, Action a, std::string summary = "")
{
    MemoryRecord r;
    r.step = step;
    r.app = "A";
    r.screen = std::move(screen);
    r.result_screen = std::move(result);
    r.action = std::move(a);
    r.summary = std::move(summary);
    return r;
}

}  // namespace

TEST_CASE("fallback allocation examples")
{
    std::map<std::string, double> none;
    auto even = allocate_budgets({"A", "B"}, 20, none, nullptr);
    CHECK(even.budgets == std::map<std::string, int>{{"A", 10}, {"B", 10}});
    CHECK(!even.from_supervisor);

    std::map<std::string, double> w = {{"A", 0.5}, {"B", 0.3}, {"C", 0.2}};
    CHECK(allocate_budgets({"A", "B", "C"}, 10, w, nullptr).budgets ==
          std::map<std::string, int>{{"A", 5}, {"B", 3}, {"C", 2}});

    // tiny weights still get one step each
    CHECK(fallback_allocation({"A", "B"}, 3, {{"A", 0.99}, {"B", 0.01}}) ==
          std::map<std::string, int>{{"A", 2}, {"B", 1}});
    CHECK_THROWS_AS(fallback_allocation({"A", "B", "C"}, 2, {}), Error);
}

TEST_CASE("supervisor budget answers are validated")
{
    std::map<std::string, double> w;
    MockClient bad({R"({"A": 25, "B": -5})"});
    auto a = allocate_budgets({"A", "B"}, 20, w, &bad);
    CHECK(!a.from_supervisor);
    CHECK(!a.rejection.empty());
    CHECK(a.budgets == std::map<std::string, int>{{"A", 10}, {"B", 10}});

    MockClient good({R"(Sure: {"A": 14, "B": 6})"});
    auto b = allocate_budgets({"A", "B"}, 20, w, &good);
    CHECK(b.from_supervisor);
    CHECK(b.budgets == std::map<std::string, int>{{"A", 14}, {"B", 6}});

    MockClient extra({R"({"A": 10, "B": 5, "C": 5})"});
    CHECK(!allocate_budgets({"A", "B"}, 20, w, &extra).from_supervisor);
}

TEST_CASE("update_weights")
{
    BudgetState s;
    s.weights = {{"A", 0.5}, {"B", 0.5}};
    s.penalty = 0.2;
    s.gamma = 3;
    s.cyclic["A"] = 4;
    CHECK(update_weights(s, "A"));
    CHECK(s.weights["A"] == doctest::Approx(0.4 / 0.9).epsilon(1e-12));
    CHECK(s.weights["B"] == doctest::Approx(0.5 / 0.9).epsilon(1e-12));
    CHECK(s.weights["A"] == doctest::Approx(0.4444).epsilon(1e-4));

    BudgetState guard = s;
    guard.cyclic["A"] = 3;
    CHECK(!update_weights(guard, "A"));
    CHECK(guard.weights == s.weights);

    BudgetState single;
    single.weights = {{"A", 1.0}};
    single.cyclic["A"] = 10;
    single.gamma = 0;
    update_weights(single, "A");
    CHECK(single.weights["A"] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(update_weights(single, "Z"), Error);
}

TEST_CASE("detect_cycle")
{
    const Action c3 = Action::click(ElementIndex{3});
    WorkingMemory same;
    same.append(rec(1, "S1", "S1", c3));
    same.append(rec(2, "S1", "S1", c3));
    CHECK(detect_cycle(same, 2) == CycleSignal::repeat);

    WorkingMemory fresh;
    fresh.append(rec(1, "S1", "S2", c3));
    fresh.append(rec(2, "S2", "S3", c3));
    fresh.append(rec(3, "S3", "S4", c3));
    CHECK(detect_cycle(fresh, 6) == CycleSignal::novel);

    const Action a = Action::click(ElementIndex{0});
    const Action b = Action::click(ElementIndex{1});
    WorkingMemory two;
    two.append(rec(1, "S1", "S2", a));
    two.append(rec(2, "S2", "S1", b));
    two.append(rec(3, "S1", "S2", a));
    two.append(rec(4, "S2", "S1", b));
    CHECK(detect_cycle(two, 4) == CycleSignal::repeat);
    // outside the window the repetition is not seen
    CHECK(detect_cycle(two, 2) != CycleSignal::repeat);
}

TEST_CASE("check_rollback")
{
    WorkingMemory m;
    for (int i = 1; i <= 9; ++i) {
        m.append(rec(i, "S", "S", Action::click(ElementIndex{i}), "summary " + std::to_string(i)));
    }
    MockClient no({"No backtrack needed"});
    CHECK(!check_rollback(m, 9, no).directive);

    MockClient four({"Looping. Backtrack to step 4"});
    auto c = check_rollback(m, 9, four);
    REQUIRE(c.directive);
    CHECK(c.directive->target_step == 4);
    CHECK(c.directive->failed_actions ==
          std::vector<std::string>{"summary 5", "summary 6", "summary 7", "summary 8", "summary 9"});

    MockClient twelve({"Backtrack to step 12"});
    auto bad = check_rollback(m, 9, twelve);
    CHECK(!bad.directive);
    CHECK(bad.invalid_target);

    MockClient noise({"hmm"});
    auto u = check_rollback(m, 9, noise);
    CHECK(!u.directive);
    CHECK(u.unparseable);
}

TEST_CASE("single-app run follows the explorer script")
{
    RecordingEnv env({simple_app("Tiny"), simple_app("Other")});
    MockClient explorer;
    explorer.on(prompt_contains(kExplorerMarker), {kNext, kNext, kNext, kNext, kNext});
    MockClient sup;
    supervise(sup);
    auto r = run_trajectory("t", params(5, {"Tiny"}), env, explorer, sup);
    CHECK(r.status == RunStatus::complete);
    REQUIRE(r.trajectory.steps.size() == 5);
    for (const auto& s : r.trajectory.steps) {
        CHECK(s.app == "Tiny");
        CHECK(s.action == Action::click(ElementIndex{0}));
        CHECK(s.summary == "did a step");
    }
    CHECK(validate_trajectory(r.trajectory).empty());
    CHECK(r.before.size() == 5);
    CHECK(r.final_observation.screen_id == "second");
}

TEST_CASE("two-app run switches when the budget is used")
{
    SimulatedEnvironment env({simple_app("Alpha"), simple_app("Beta")});
    MockClient explorer;
    explorer.on(prompt_contains(kExplorerMarker), [](const ChatRequest&) { return kNext; });
    MockClient sup;
    supervise(sup);
    auto r = run_trajectory("t", params(6, {"Alpha", "Beta"}), env, explorer, sup);
    CHECK(r.status == RunStatus::complete);
    REQUIRE(r.trajectory.steps.size() == 6);
    for (int i = 0; i < 3; ++i) {
        CHECK(r.trajectory.steps[static_cast<std::size_t>(i)].app == "Alpha");
    }
    CHECK(r.trajectory.steps[3].action == Action::open_app("Beta"));
    for (int i = 3; i < 6; ++i) {
        CHECK(r.trajectory.steps[static_cast<std::size_t>(i)].app == "Beta");
    }
    CHECK(apps_in_steps(r.trajectory) == std::vector<std::string>{"Alpha", "Beta"});
    CHECK(validate_trajectory(r.trajectory).empty());
}

TEST_CASE("explorer answers are re-asked and bad runs fail softly")
{
    SimulatedEnvironment env({simple_app("Tiny")});
    MockClient explorer;
    explorer.on(prompt_contains(kExplorerMarker),
                {"gibberish", act(R"({"action_type": "click", "index": 9})"), kNext, kNext});
    MockClient sup;
    supervise(sup);
    auto r = run_trajectory("t", params(2, {"Tiny"}), env, explorer, sup);
    CHECK(r.status == RunStatus::complete);
    CHECK(r.trajectory.steps.size() == 2);
    CHECK(explorer.call_count() == 4);

    MockClient broken;
    broken.on(prompt_contains(kExplorerMarker), {"x", "y", "z"});
    auto failed = run_trajectory("t", params(2, {"Tiny"}), env, broken, sup);
    CHECK(failed.status == RunStatus::failed);
    CHECK(!failed.message.empty());

    // a model that stops answering ends the run without throwing
    MockClient silent;
    CHECK(run_trajectory("t", params(2, {"Tiny"}), env, silent, sup).status == RunStatus::failed);
}

TEST_CASE("rollback restores the step-one state")
{
    RecordingEnv env({simple_app("Tiny")});
    MockClient explorer;
    explorer.on(prompt_contains(kExplorerMarker), {kStay, kStay, kNext, kNext, kNext});
    McgConfig cfg;
    cfg.gamma = 1;
    MockClient sup;
    supervise(sup, {"Backtrack to step 1", "No backtrack needed", "No backtrack needed"});
    auto r = run_trajectory("t", params(5, {"Tiny"}), env, explorer, sup, cfg);

    CHECK(r.rollbacks == 1);
    REQUIRE(env.restores.size() == 1);
    // steps[0] is the initial launch, steps[1] the state after step 1
    CHECK(env.restores[0] == env.steps[1]);
    REQUIRE(r.trajectory.steps.size() >= 2);
    CHECK(r.trajectory.steps[0].action == Action::click(ElementIndex{1}));
    CHECK(r.trajectory.steps[1].action == Action::click(ElementIndex{0}));
    CHECK(r.trajectory.steps.size() <= 5);
    CHECK(validate_trajectory(r.trajectory).empty());
    // the warning reaches the explorer after the rollback
    bool warned = false;
    for (const auto& req : explorer.requests()) {
        warned = warned || req.text().find("[WARNING] You were backtracked") != std::string::npos;
    }
    CHECK(warned);
}

TEST_CASE("rollback cap ends the trajectory")
{
    RecordingEnv env({simple_app("Tiny")});
    MockClient explorer;
    explorer.on(prompt_contains(kExplorerMarker), [](const ChatRequest&) { return kStay; });
    MockClient sup;
    sup.on(prompt_contains(kBudgetMarker), [](const ChatRequest&) { return std::string("?"); });
    sup.on(prompt_contains(kLoopMarker), [](const ChatRequest&) { return std::string("Backtrack to step 1"); });
    sup.on([](const ChatRequest&) { return true; }, [](const ChatRequest&) { return std::string("stayed"); });
    McgConfig cfg;
    cfg.max_rollbacks = 3;
    auto r = run_trajectory("t", params(30, {"Tiny"}), env, explorer, sup, cfg);
    CHECK(r.rollbacks == 3);
    CHECK(env.restores.size() == 3);
    CHECK(r.trajectory.steps.size() == 2);
    CHECK(r.status == RunStatus::complete);
}

TEST_CASE("synthesize_thought")
{
    SimulatedEnvironment env({simple_app("Tiny")});
    env.reset();
    const auto before = env.step(Action::open_app("Tiny")).observation;
    const auto after = env.step(Action::click(ElementIndex{0})).observation;
    const Action a = Action::click(ElementIndex{0});

    MockClient ok({R"({"reasoning":"I tap Save","analysis":""})"});
    CHECK(synthesize_thought(before, a, after, ok) == "I tap Save");

    MockClient extra({R"({"reasoning":"r","analysis":"a","mood":"happy"})"});
    CHECK(synthesize_thought(before, a, after, extra) == "r");

    MockClient prose({"I think I tapped it.", "Still prose."});
    CHECK(!synthesize_thought(before, a, after, prose));
    CHECK(prose.call_count() == 2);
}

TEST_CASE("synthesize_instruction keeps app names and typed text verbatim")
{
    Trajectory t;
    t.id = "s";
    t.params = params(2, {"Tasks"});
    Step s1;
    s1.index = 1;
    s1.app = "Tasks";
    s1.action = Action::input_text("buy milk", ElementIndex{0});
    s1.thought = "type it";
    t.steps.push_back(s1);

    MockClient ok({R"({"task_instruction": "In Tasks, add buy milk."})"});
    CHECK(synthesize_instruction(t, DifficultyLevel::easy, ok) == "In Tasks, add buy milk.");

    MockClient missing({R"({"task_instruction": "In Tasks, add milk."})", R"({"task_instruction": "Add milk."})",
                        R"({"task_instruction": "Tasks: milk"})"});
    try {
        synthesize_instruction(t, DifficultyLevel::easy, missing);
        FAIL("expected ConstraintViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::constraint_violated);
    }
    CHECK(missing.call_count() == 3);

    t.steps[0].action = Action::click(ElementIndex{0});
    CHECK(!missing_instruction_term(t, "Open Tasks"));
    CHECK(missing_instruction_term(t, "Open the app") == "Tasks");
}

TEST_CASE("property: budget algebra")
{
    Rng rng(123);
    for (int seq = 0; seq < 10000; ++seq) {
        BudgetState s;
        s.gamma = static_cast<int>(rng.uniform_int(0, 3));
        s.penalty = 0.05 + 0.9 * rng.uniform();
        const int n_apps = static_cast<int>(rng.uniform_int(1, 4));
        std::vector<std::string> apps;
        for (int a = 0; a < n_apps; ++a) {
            apps.push_back("app" + std::to_string(a));
        }
        int remaining = static_cast<int>(rng.uniform_int(n_apps, 40));
        s.budgets = allocate_budgets(apps, remaining, s.weights, nullptr).budgets;
        for (int op = 0; op < 5; ++op) {
            const auto& app = apps[rng.uniform_int(0, n_apps - 1)];
            s.cyclic[app] = static_cast<int>(rng.uniform_int(0, 6));
            update_weights(s, app);
            remaining = std::max(n_apps, remaining - static_cast<int>(rng.uniform_int(0, 5)));
            s.budgets = fallback_allocation(apps, remaining, s.weights);
            double wsum = 0;
            for (const auto& [k, w] : s.weights) {
                wsum += w;
            }
            int bsum = 0;
            for (const auto& [k, b] : s.budgets) {
                bsum += b;
                CHECK(b >= 1);
            }
            REQUIRE(std::abs(wsum - 1.0) <= 1e-9);
            REQUIRE(bsum == remaining);
        }
    }
}

TEST_CASE("truncate_words")
{
    CHECK(truncate_words("one two three", 2) == "one two");
    CHECK(truncate_words("  one  ", 5) == "one");
}
