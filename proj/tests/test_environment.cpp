#include "mobilegen/environment.hpp"
#include "mobilegen/error.hpp"
#include "mobilegen/rng.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace mobilegen;
using test_support::simple_app;

namespace {

std::string bytes(const Observation& o)
{
    return observation_to_json(o).dump();
}

ErrorCode code_of(const auto& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::io_error;
}

SimulatedEnvironment tiny_env()
{
    SimulatedEnvironment env({simple_app("Tiny"), simple_app("Other")});
    env.reset();
    env.step(Action::open_app("Tiny"));
    return env;
}

}  // namespace

TEST_CASE("graph loading")
{
    CHECK_NOTHROW(load_app_graph(R"({"app":"Two","home":"a","screens":[
        {"id":"a","elements":[{"type":"button","label":"go"}]},{"id":"b","elements":[]}],
        "transitions":[{"from":"a","action":"click","element":0,"to":"b"}]})"));

    try {
        load_app_graph(R"({"app":"Bad","home":"a","screens":[{"id":"a","elements":[{"type":"button","label":"go"}]}],
            "transitions":[{"from":"a","action":"click","element":0,"to":"nowhere"}]})");
        FAIL("expected GraphInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::graph_invalid);
        CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
    }

    try {
        load_app_graph(R"({"app":"Bad","home":"a","screens":[{"id":"a","elements":[]},{"id":"island","elements":[]}],
            "transitions":[]})");
        FAIL("expected GraphInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::graph_invalid);
        CHECK(std::string(e.what()).find("island") != std::string::npos);
    }
    CHECK(code_of([] { load_app_graph("[]"); }) == ErrorCode::graph_invalid);
}

TEST_CASE("step semantics")
{
    auto env = tiny_env();
    auto home = env.observe();
    CHECK(home.app == "Tiny");
    CHECK(home.screen_id == "home");

    auto w = env.step(Action::simple(ActionType::wait));
    CHECK(!w.no_effect);
    CHECK(bytes(w.observation) == bytes(home));

    auto stay = env.step(Action::click(ElementIndex{1}));
    CHECK(stay.no_effect);
    CHECK(bytes(stay.observation) == bytes(home));

    auto next = env.step(Action::click(ElementIndex{0}));
    CHECK(!next.no_effect);
    CHECK(next.observation.screen_id == "second");

    auto back = env.step(Action::simple(ActionType::navigate_back));
    CHECK(back.observation.screen_id == "home");

    auto typed = env.step(Action::input_text("let's go", ElementIndex{2}));
    CHECK(typed.observation.screen_id == "typed");

    auto launcher = env.step(Action::simple(ActionType::navigate_home));
    CHECK(launcher.observation.app == std::string(kLauncherApp));
    CHECK(launcher.observation.elements.size() == 2);

    CHECK(code_of([&] { env.step(Action::open_app("Nope")); }) == ErrorCode::unknown_app);
    CHECK(code_of([&] { env.step(Action::simple(ActionType::terminate)); }) == ErrorCode::environment_fault);
}

TEST_CASE("coordinates resolve to the element under the point")
{
    auto env = tiny_env();
    const auto& next = env.observe().elements.at(0);
    auto r = env.step(Action::click(next.bbox.center()));
    CHECK(r.observation.screen_id == "second");
}

TEST_CASE("typing without a matching edge keeps the text")
{
    auto env = tiny_env();
    auto r = env.step(Action::input_text("stay put", ElementIndex{2}));
    CHECK(r.observation.screen_id == "home");
    CHECK(!r.no_effect);
    CHECK(r.observation.elements.at(2).text == "stay put");
}

TEST_CASE("snapshot and restore")
{
    auto env = tiny_env();
    const auto token = env.snapshot();
    const auto at_snapshot = bytes(env.observe());
    env.step(Action::click(ElementIndex{0}));
    env.step(Action::click(ElementIndex{0}));
    env.step(Action::input_text("x", ElementIndex{2}));
    CHECK(bytes(env.restore(token)) == at_snapshot);
    env.step(Action::click(ElementIndex{0}));
    const auto again = bytes(env.restore(token));
    CHECK(again == at_snapshot);
    CHECK(bytes(env.restore(token)) == again);

    env.reset();
    CHECK(code_of([&] { env.restore(token); }) == ErrorCode::stale_token);
}

TEST_CASE("property: random walks are deterministic and restorable")
{
    Rng rng(31);
    for (int round = 0; round < 100; ++round) {
        std::vector<Action> script;
        for (int i = 0; i < 20; ++i) {
            switch (rng.uniform_int(0, 5)) {
            case 0: script.push_back(Action::click(ElementIndex{static_cast<int>(rng.uniform_int(0, 3))})); break;
            case 1: script.push_back(Action::input_text(rng.uniform() < 0.5 ? "go" : "no", ElementIndex{2})); break;
            case 2: script.push_back(Action::simple(ActionType::navigate_back)); break;
            case 3: script.push_back(Action::open_app(rng.uniform() < 0.5 ? "Tiny" : "Other")); break;
            case 4: script.push_back(Action::scroll(Direction::down)); break;
            default: script.push_back(Action::simple(ActionType::navigate_home)); break;
            }
        }
        const auto cut = static_cast<std::size_t>(rng.uniform_int(0, 19));
        auto run = [&](bool with_restore) {
            SimulatedEnvironment env({simple_app("Tiny"), simple_app("Other")});
            env.reset();
            std::vector<std::string> trace;
            SnapshotToken token;
            std::string at_cut;
            for (std::size_t i = 0; i < script.size(); ++i) {
                if (i == cut) {
                    token = env.snapshot();
                    at_cut = bytes(env.observe());
                }
                trace.push_back(bytes(env.step(script[i]).observation));
            }
            if (with_restore) {
                CHECK(bytes(env.restore(token)) == at_cut);
            }
            return trace;
        };
        CHECK(run(true) == run(false));
    }
}

TEST_CASE("bundled scenario apps load")
{
    auto apps = load_app_graphs(std::string(MOBILEGEN_SCENARIO_DIR) + "/apps");
    CHECK(apps.size() >= 3);
    SimulatedEnvironment env(apps);
    env.reset();
    for (const auto& g : apps) {
        CHECK(env.step(Action::open_app(g.app)).observation.app == g.app);
    }
}
