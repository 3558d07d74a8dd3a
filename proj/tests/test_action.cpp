#include "mobilegen/action.hpp"
#include "mobilegen/error.hpp"
#include "mobilegen/rng.hpp"
#include "mobilegen/trajectory.hpp"

#include <doctest.h>

using namespace mobilegen;

namespace {

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

Trajectory single_app(int steps, int dot)
{
    Trajectory t;
    t.id = "t1";
    t.instruction = "do things in A";
    t.params = DifficultyParams{dot, 1, DifficultyLevel::easy, DifficultyLevel::medium, {"A"}};
    for (int i = 1; i <= steps; ++i) {
        Step s;
        s.index = i;
        s.app = "A";
        s.action = Action::click(ElementIndex{i});
        t.steps.push_back(s);
    }
    return t;
}

}  // namespace

TEST_CASE("parse_action_text reads reason and single-quoted action")
{
    auto p = parse_action_text("Reason: open mail\nAction: {'action_type': 'open_app', 'app_name': 'Gmail'}");
    CHECK(p.reason == "open mail");
    CHECK(p.action == Action::open_app("Gmail"));

    auto back = parse_action_text("Reason: go back\nAction: {'action_type': 'navigate_back'}");
    CHECK(back.reason == "go back");
    CHECK(back.action == Action::simple(ActionType::navigate_back));
}

TEST_CASE("parse_action_text error ladder")
{
    CHECK(code_of([] { parse_action_text("Action: {'action_type': 'click'}"); }) ==
          ErrorCode::malformed_action_text);
    CHECK(code_of([] { parse_action_text("Reason: x\nAction: {'action_type': 'click'}"); }) ==
          ErrorCode::missing_field);
    CHECK(code_of([] { parse_action_text("Reason: x\nAction: {'action_type': 'fly'}"); }) ==
          ErrorCode::unknown_action_type);
    CHECK(code_of([] { parse_action_text("Reason: x"); }) == ErrorCode::malformed_action_text);
}

TEST_CASE("aliases are normalized when parsing")
{
    auto p = parse_action_text("Reason: r\nAction: {'action_type': 'tap', 'index': 3}");
    CHECK(p.action == Action::click(ElementIndex{3}));
}

TEST_CASE("click needs exactly one target")
{
    CHECK(code_of([] { parse_action_text("Reason: r\nAction: {\"action_type\": \"click\", \"index\": 1, \"x\": 3, \"y\": 4}"); }) ==
          ErrorCode::schema_violation);
}

TEST_CASE("render then parse recovers every action")
{
    const std::vector<Action> actions = {
        Action::click(ElementIndex{0}),
        Action::click(Point{12.5, 900}),
        Action::long_press(ElementIndex{7}),
        Action::long_press(Point{1, 2}),
        Action::scroll(Direction::up),
        Action::scroll(Direction::left, ElementIndex{2}),
        Action::input_text("caf\xC3\xA9 \xE2\x98\x95 'quoted' \"double\"", ElementIndex{1}),
        Action::input_text("plain"),
        Action::open_app("Simple Calendar Pro"),
        Action::simple(ActionType::navigate_home),
        Action::simple(ActionType::navigate_back),
        Action::simple(ActionType::wait),
        Action::simple(ActionType::keyboard_enter),
    };
    for (const auto& a : actions) {
        CAPTURE(action_compact(a));
        auto p = parse_action_text(render_action_text("because", a));
        CHECK(p.reason == "because");
        CHECK(p.action == a);
        CHECK(action_from_json(action_to_json(a)) == a);
    }
}

TEST_CASE("validate_trajectory examples")
{
    auto ok = single_app(5, 5);
    CHECK(validate_trajectory(ok).empty());

    auto foreign = single_app(3, 5);
    foreign.steps[2].app = "B";
    auto v = validate_trajectory(foreign);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message == "app B not in sampled set");
    CHECK(v[0].position == 3);

    auto gap = single_app(3, 5);
    gap.steps[2].index = 4;
    v = validate_trajectory(gap);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message == "non-contiguous step index at position 3");

    auto long_one = single_app(6, 5);
    CHECK(validate_trajectory(long_one).size() == 1);
}

TEST_CASE("validate_params")
{
    CHECK(validate_params(DifficultyParams{3, 2, DifficultyLevel::easy, DifficultyLevel::easy, {"A", "B"}}).empty());
    CHECK(!validate_params(DifficultyParams{1, 2, DifficultyLevel::easy, DifficultyLevel::easy, {"A", "B"}}).empty());
    CHECK(!validate_params(DifficultyParams{3, 2, DifficultyLevel::easy, DifficultyLevel::easy, {"A"}}).empty());
    CHECK(!validate_params(DifficultyParams{3, 2, DifficultyLevel::easy, DifficultyLevel::easy, {"A", "A"}}).empty());
}

TEST_CASE("serialization round trips")
{
    Trajectory empty;
    empty.id = "e";
    empty.params = DifficultyParams{1, 1, DifficultyLevel::hard, DifficultyLevel::easy, {"A"}};
    CHECK(deserialize(serialize(empty)) == empty);

    auto t = single_app(2, 4);
    t.steps[1].action = Action::input_text("caf\xC3\xA9 \xE2\x98\x95", ElementIndex{0});
    t.steps[1].thought = "I type it";
    t.steps[1].summary = "typed";
    t.steps[0].observation = {"screens/1.png", "screens/1.som.png", "ui/1.json"};
    t.quality = QualityScores{{{1, 9, "fine"}, {2, 7, "ok"}}, 9, "good"};
    const std::string bytes = serialize(t);
    CHECK(deserialize(bytes) == t);
    CHECK(serialize(deserialize(bytes)) == bytes);
}

TEST_CASE("deserialize rejects unknown action types and fields")
{
    auto bytes = serialize(single_app(1, 1));
    auto bad_type = bytes;
    bad_type.replace(bad_type.find("\"click\""), 7, "\"teleport\"");
    CHECK(code_of([&] { deserialize(bad_type); }) == ErrorCode::schema_violation);

    auto extra = nlohmann::json::parse(bytes);
    extra["colour"] = "blue";
    CHECK(code_of([&] { deserialize(extra.dump()); }) == ErrorCode::schema_violation);

    auto missing = nlohmann::json::parse(bytes);
    missing.erase("params");
    CHECK(code_of([&] { deserialize(missing.dump()); }) == ErrorCode::schema_violation);

    CHECK(code_of([] { deserialize("not json"); }) == ErrorCode::schema_violation);
}

TEST_CASE("serialize refuses invalid trajectories")
{
    auto t = single_app(3, 2);
    CHECK_THROWS_AS(serialize(t), Error);
}

TEST_CASE("property: randomized trajectories round trip")
{
    Rng rng(99);
    const std::vector<std::string> apps = {"Notes", "Calendar", "Caf\xC3\xA9", "Shop"};
    for (int n = 0; n < 300; ++n) {
        Trajectory t;
        t.id = "r" + std::to_string(n);
        t.instruction = rng.uniform() < 0.5 ? "" : "task " + std::to_string(rng.next() % 1000);
        const int bot = static_cast<int>(rng.uniform_int(1, 4));
        const int dot = static_cast<int>(rng.uniform_int(bot, 12));
        t.params = DifficultyParams{dot, bot, kAllLevels[rng.uniform_int(0, 2)], kAllLevels[rng.uniform_int(0, 2)],
                                    std::vector<std::string>(apps.begin(), apps.begin() + bot)};
        const int steps = static_cast<int>(rng.uniform_int(0, dot));
        for (int i = 1; i <= steps; ++i) {
            Step s;
            s.index = i;
            s.app = t.params.app_set[rng.uniform_int(0, bot - 1)];
            switch (rng.uniform_int(0, 5)) {
            case 0: s.action = Action::click(ElementIndex{static_cast<int>(rng.uniform_int(0, 9))}); break;
            case 1: s.action = Action::click(Point{static_cast<double>(rng.uniform_int(0, 1080)), 0.5}); break;
            case 2: s.action = Action::scroll(Direction::down); break;
            case 3: s.action = Action::input_text("t\xE2\x98\x95" + std::to_string(i)); break;
            case 4: s.action = Action::open_app(s.app); break;
            default: s.action = Action::simple(ActionType::wait); break;
            }
            if (rng.uniform() < 0.5) {
                s.thought = "thought " + std::to_string(i);
            }
            t.steps.push_back(s);
        }
        REQUIRE(validate_trajectory(t).empty());
        const auto bytes = serialize(t);
        CHECK(deserialize(bytes) == t);
        CHECK(serialize(deserialize(bytes)) == bytes);
    }
}

TEST_CASE("generation action space")
{
    CHECK(is_generation_action(ActionType::keyboard_enter));
    CHECK(!is_generation_action(ActionType::terminate));
    CHECK(!is_generation_action(ActionType::answer));
    CHECK(!is_generation_action(ActionType::status));
    CHECK(numeric_score(DifficultyLevel::easy) < numeric_score(DifficultyLevel::medium));
    CHECK(numeric_score(DifficultyLevel::hard) == 3);
}
