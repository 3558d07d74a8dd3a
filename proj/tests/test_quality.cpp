#include "mobilegen/error.hpp"
#include "mobilegen/quality.hpp"
#include "mobilegen/rng.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace mobilegen;
using test_support::simple_app;

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

QualityReport report(std::string id, int score)
{
    QualityReport r;
    r.trajectory_id = std::move(id);
    r.trajectory_score = score;
    return r;
}

struct Fixture {
    SimulatedEnvironment env{{simple_app("Tiny")}};
    Trajectory t;
    std::vector<Observation> before;
    Observation final_obs;

    Fixture()
    {
        env.reset();
        env.step(Action::open_app("Tiny"));
        t.id = "q";
        t.instruction = "Open Tiny and go to the second screen and back.";
        t.params = DifficultyParams{6, 1, DifficultyLevel::easy, DifficultyLevel::easy, {"Tiny"}};
        const std::vector<Action> script = {Action::click(ElementIndex{0}), Action::click(ElementIndex{0}),
                                            Action::click(ElementIndex{1}), Action::click(ElementIndex{0}),
                                            Action::click(ElementIndex{0})};
        for (std::size_t i = 0; i < script.size(); ++i) {
            before.push_back(env.observe());
            env.step(script[i]);
            Step s;
            s.index = static_cast<int>(i) + 1;
            s.app = "Tiny";
            s.action = script[i];
            s.thought = "step " + std::to_string(i + 1);
            t.steps.push_back(s);
        }
        final_obs = env.observe();
    }
};

}  // namespace

TEST_CASE("step judgement parsing")
{
    auto j = parse_step_judgement(R"({"score": 9, "reason": "consistent"})");
    CHECK(j.score == 9);
    CHECK(j.reason == "consistent");
    CHECK(parse_step_judgement(R"({"score": "7", "reason": "fine"})").score == 7);
    CHECK(parse_step_judgement("Here you go: {'score': 4, 'reason': 'meh'}").score == 4);
    CHECK(code_of([] { parse_step_judgement(R"({"score": 15, "reason": "x"})"); }) ==
          ErrorCode::invalid_judge_output);
    CHECK(code_of([] { parse_step_judgement(R"({"score": 0})"); }) == ErrorCode::invalid_judge_output);
    CHECK(code_of([] { parse_step_judgement("nine"); }) == ErrorCode::invalid_judge_output);
}

TEST_CASE("trajectory judgement parsing")
{
    auto a = parse_trajectory_judgement("Reason: efficient\nScore: 10");
    CHECK(a.score == 10);
    CHECK(a.reason == "efficient");
    auto b = parse_trajectory_judgement("Reason: loops\nScore: 2");
    CHECK(b.score == 2);
    CHECK(b.reason == "loops");
    CHECK(code_of([] { parse_trajectory_judgement("Score: 8\nReason: ok"); }) == ErrorCode::invalid_judge_output);
    CHECK(code_of([] { parse_trajectory_judgement("Reason: x\nScore: 11"); }) == ErrorCode::invalid_judge_output);
}

TEST_CASE("judge_step asks again once")
{
    Fixture f;
    const auto* el = f.before[0].element(0);
    StepContext ctx{f.t.instruction, f.t.steps[0].action, "tap next", el, &f.before[0], &f.before[1]};

    MockClient ok({R"({"score": 9, "reason": "consistent"})"});
    auto j = judge_step(ctx, ok);
    CHECK(j.score == 9);
    CHECK(ok.requests().front().image_count() == 2);

    MockClient second({R"({"score": 15, "reason": "x"})", R"({"score": 6, "reason": "ok"})"});
    CHECK(judge_step(ctx, second).score == 6);

    MockClient bad({R"({"score": 15, "reason": "x"})", R"({"score": 15, "reason": "x"})"});
    CHECK(code_of([&] { judge_step(ctx, bad); }) == ErrorCode::invalid_judge_output);
}

TEST_CASE("judge_trajectory sees the recent screenshots and the statistics")
{
    Fixture f;
    auto stats = trajectory_stats(f.t, f.before, f.final_obs);
    CHECK(stats.steps == 5);
    CHECK(stats.apps == 1);
    CHECK(stats.distinct_screens == 2);
    CHECK(stats.no_effect_steps == 1);
    CHECK(stats.repeated_actions >= 2);

    MockClient m({"Reason: fine\nScore: 8"});
    JudgeOptions opts;
    opts.screenshots = 4;
    auto j = judge_trajectory(f.t, f.before, f.final_obs, m, opts);
    CHECK(j.score == 8);
    CHECK(m.requests().front().image_count() == 4);

    MockClient swapped({"Score: 8\nReason: ok", "Score: 8\nReason: ok"});
    CHECK(code_of([&] { judge_trajectory(f.t, f.before, f.final_obs, swapped, opts); }) ==
          ErrorCode::invalid_judge_output);
}

TEST_CASE("filter_dataset")
{
    CHECK(filter_dataset({report("a", 9), report("b", 8), report("c", 10)}, 8) == std::vector<std::string>{"a", "c"});
    CHECK(filter_dataset({}, 8).empty());
    CHECK(filter_dataset({report("a", 9), report("b", 10)}, 10).empty());
    CHECK(code_of([] { filter_dataset({}, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("report JSON round trip")
{
    QualityReport r = report("x", 7);
    r.trajectory_reason = "ok";
    r.step_scores = {{1, 9, "good"}, {2, 3, "bad"}};
    r.kept = false;
    auto back = report_from_json(report_to_json(r));
    CHECK(back.trajectory_id == "x");
    CHECK(back.trajectory_score == 7);
    CHECK(back.step_scores == r.step_scores);
}

TEST_CASE("property: judge parsers never fail outside their error type")
{
    Rng rng(404);
    const std::string alphabet = "{}\"':,0123456789 ScoreReason\n-.\xC3\xA9\x80\xff";
    for (int i = 0; i < 5000; ++i) {
        std::string s;
        const auto len = rng.uniform_int(0, 60);
        for (int k = 0; k < len; ++k) {
            s.push_back(alphabet[rng.uniform_int(0, static_cast<std::int64_t>(alphabet.size()) - 1)]);
        }
        for (auto* parse : {&parse_step_judgement, &parse_trajectory_judgement}) {
            try {
                auto j = parse(s);
                CHECK(j.score >= 1);
                CHECK(j.score <= 10);
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::invalid_judge_output);
            }
        }
    }
}
