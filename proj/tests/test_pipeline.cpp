#include "mobilegen/config.hpp"
#include "mobilegen/dataset.hpp"
#include "mobilegen/error.hpp"
#include "mobilegen/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace mobilegen;
using test_support::TempDir;

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

Trajectory tiny_trajectory(std::string id, std::string app, int dot)
{
    Trajectory t;
    t.id = std::move(id);
    t.params = DifficultyParams{dot, 1, DifficultyLevel::medium, DifficultyLevel::hard, {std::move(app)}};
    return t;
}

Config scenario_config(const fs::path& run_dir, int n, std::uint64_t seed)
{
    Config cfg = load_config(fs::path(MOBILEGEN_SCENARIO_DIR) / "mobilegen.toml");
    cfg.run_dir = run_dir.string();
    cfg.n = n;
    cfg.seed = seed;
    return cfg;
}

std::map<std::string, std::string> stage_status(const RunManifest& m)
{
    std::map<std::string, std::string> out;
    for (const auto& s : m.stages) {
        out[s.name] = s.status;
    }
    return out;
}

}  // namespace

TEST_CASE("prior grid")
{
    const std::vector<std::string> apps = {"A", "B", "C", "D"};
    auto one = build_prior_plan(1, apps, 3);
    CHECK(one.size() == 9);
    std::set<std::pair<int, DifficultyLevel>> cells;
    for (const auto& p : one) {
        cells.insert({p.bot, p.icd});
    }
    CHECK(cells.size() == 9);

    auto many = build_prior_plan(1000, apps, 5);
    REQUIRE(many.size() == 9000);
    std::map<DifficultyLevel, int> iud;
    for (const auto& p : many) {
        CHECK(validate_params(p).empty());
        if (p.bot == 1) {
            CHECK((p.dot >= 10 && p.dot <= 15));
        } else if (p.bot == 2) {
            CHECK((p.dot >= 16 && p.dot <= 25));
        } else {
            CHECK(p.bot == 3);
            CHECK((p.dot >= 26 && p.dot <= 35));
        }
        iud[p.iud] += 1;
    }
    const double sd = std::sqrt(9000.0 * (1.0 / 3) * (2.0 / 3));
    for (auto level : kAllLevels) {
        CHECK(std::abs(iud[level] - 3000) <= 3 * sd);
    }
    CHECK_THROWS_AS(build_prior_plan(1, {"A", "B"}, 1), Error);
}

TEST_CASE("statistics")
{
    auto s = compute_stats({tiny_trajectory("a", "Notes", 5), tiny_trajectory("b", "Notes", 5),
                            tiny_trajectory("c", "Mail", 7)});
    CHECK(s.trajectories == 3);
    CHECK(s.app_frequency == std::map<std::string, int>{{"Mail", 1}, {"Notes", 2}});
    CHECK(s.dot == std::map<int, int>{{5, 2}, {7, 1}});
    CHECK(s.icd.at("medium") == 3);
    CHECK(stats_to_csv(s).find("dot,5,2") != std::string::npos);

    TempDir empty("stats");
    CHECK(code_of([&] { export_stats(empty.path()); }) == ErrorCode::empty_dataset);
}

TEST_CASE("configuration")
{
    CHECK(code_of([] { parse_config("[challenge]\nalpha = 0.0\n"); }) == ErrorCode::invalid_config);
    CHECK(code_of([] { parse_config("[challenge]\nalpha = -1.0\n"); }) == ErrorCode::invalid_config);
    CHECK(code_of([] { parse_config("colour = \"blue\"\n"); }) == ErrorCode::invalid_config);
    CHECK(code_of([] { parse_config("n = \"ten\"\n"); }) == ErrorCode::invalid_config);

    Config c = parse_config("seed = 3\n[quality]\nthreshold = 7\n[profiling]\nk = 5\n");
    CHECK(c.seed == 3);
    CHECK(c.quality.threshold == 7);
    CHECK(c.profiling.k == 5);
    CHECK(c.challenge.eta_d == 6.0);
    CHECK(parse_config(render_config(c)) == c);

    Config a = c;
    a.run_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(c));
    a.seed = 4;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("params and status files round trip")
{
    TempDir dir("io");
    std::vector<IdParams> items = {
        {"traj-0001", DifficultyParams{12, 2, DifficultyLevel::easy, DifficultyLevel::hard, {"A", "B"}}}};
    write_params_jsonl(dir.path() / "p.jsonl", items);
    auto back = read_params_jsonl(dir.path() / "p.jsonl");
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == "traj-0001");
    CHECK(back[0].params == items[0].params);

    std::vector<ItemStatus> st = {{"a", "complete", "", 1}, {"b", "failed", "boom", 0}};
    write_status_jsonl(dir.path() / "s.jsonl", st);
    CHECK(read_status_jsonl(dir.path() / "s.jsonl") == st);
    CHECK(trajectory_id("traj", 0) == "traj-0001");
}

TEST_CASE("full mock run and resumption")
{
    TempDir dir("run");
    const Config cfg = scenario_config(dir.path() / "run", 10, 1);
    const auto first = run_pipeline(cfg);

    REQUIRE(first.stages.size() == 7);
    for (const auto& s : first.stages) {
        CHECK(s.status == "completed");
    }
    CHECK(first.requested == 10);
    CHECK(!first.kept.empty());
    const fs::path run = dir.path() / "run";
    for (const char* f : {"profile.json", "plan.json", "params.jsonl", "generate.jsonl", "synthesize.jsonl",
                          "reports.jsonl", "kept.txt", "stats.json", "stats.csv", "manifest.json"}) {
        CHECK(fs::exists(run / f));
    }
    for (const auto& id : first.kept) {
        const auto t = deserialize(read_file(run / "data" / id / "trajectory.json"));
        CHECK(validate_trajectory(t).empty());
        CHECK(t.quality);
        CHECK(t.quality->trajectory_score > cfg.quality.threshold);
    }

    // nothing to do the second time
    const auto cached = run_pipeline(cfg);
    for (const auto& s : cached.stages) {
        CHECK(s.status == "cached");
    }
    CHECK(cached.kept == first.kept);

    // dropping the judge output re-runs judge and filter only
    fs::remove(run / "reports.jsonl");
    fs::remove(run / "kept.txt");
    const auto resumed = run_pipeline(cfg);
    auto st = stage_status(resumed);
    CHECK(st["generate"] == "cached");
    CHECK(st["synthesize"] == "cached");
    CHECK(st["judge"] == "completed");
    CHECK(st["filter"] == "completed");
    CHECK(resumed.kept == first.kept);

    // dropping the parameters re-runs everything from sampling on
    fs::remove(run / "params.jsonl");
    const auto again = run_pipeline(cfg);
    st = stage_status(again);
    CHECK(st["plan"] == "cached");
    CHECK(st["sample"] == "completed");
    CHECK(st["filter"] == "completed");
    CHECK(again.kept == first.kept);

    // a separate run directory reproduces the same kept set
    TempDir other("run2");
    CHECK(run_pipeline(scenario_config(other.path() / "run", 10, 1)).kept == first.kept);
}
