// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "mobilegen/dataset.hpp"
#include "mobilegen/distribution.hpp"
#include "mobilegen/error.hpp"
#include "mobilegen/matching.hpp"
#include "mobilegen/mcg.hpp"
#include "mobilegen/pipeline.hpp"
#include "mobilegen/profiling.hpp"
#include "mobilegen/rng.hpp"
#include "mobilegen/sampling.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

using namespace mobilegen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why)
    {
        if (ok) {
            detail = why;
        }
        ok = false;
    }
};

int failures = 0;

void criterion(const char* name, double limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && secs >= limit_s) {
        o.fail("runtime over the limit");
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s %s (%.2fs, limit %.0fs)%s%s\n", o.ok ? "PASS" : "FAIL", name, secs, limit_s,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
}

DiscreteDistribution<int> uniform_on(int lo, int hi)
{
    std::vector<int> s;
    for (int i = lo; i <= hi; ++i) {
        s.push_back(i);
    }
    return DiscreteDistribution<int>::from_weights(s, std::vector<double>(s.size(), 1.0));
}

Outcome distributions()
{
    Outcome o;
    Rng rng(1);
    auto total = [](const auto& d) {
        double s = 0;
        for (double p : d.probs) {
            s += p;
        }
        return s;
    };
    for (int i = 0; i < 1000; ++i) {
        const double c = rng.uniform() * 60.0;
        const double sigma = 0.1 + rng.uniform() * 5.0;
        const auto [lo, hi] = dot_window(c, sigma);
        if (std::abs(total(structural_distribution(c, sigma, lo, hi)) - 1.0) > 1e-9) {
            o.fail("structural mass off at c=" + std::to_string(c));
        }
        if (std::abs(total(semantic_distribution(rng.uniform() * 4.0)) - 1.0) > 1e-9) {
            o.fail("semantic mass off");
        }
        std::map<std::string, double> v;
        const int n = static_cast<int>(rng.uniform_int(1, 8));
        for (int a = 0; a < n; ++a) {
            v["app" + std::to_string(a)] = rng.uniform();
        }
        if (std::abs(total(app_selection_distribution(v, rng.uniform(), 0.2 + rng.uniform())) - 1.0) > 1e-9) {
            o.fail("app selection mass off");
        }
    }
    for (int i = 0; i < 1000; ++i) {
        const double c = -1.0 + 5.0 * i / 999.0;
        const auto got = semantic_memberships(c);
        const auto want = oracle::memberships(c, 1, 2, 3);
        for (int k = 0; k < 3; ++k) {
            if (std::abs(got[k] - want[k]) > 1e-12) {
                o.fail("membership mismatch at c=" + std::to_string(c));
            }
        }
    }
    return o;
}

Outcome challenge()
{
    Outcome o;
    Rng rng(2);
    const ChallengeConfig defaults;
    for (double eta : {defaults.eta_d, defaults.eta_b, defaults.eta_int, defaults.eta_ins}) {
        for (int i = 0; i < 10000; ++i) {
            const double c = rng.uniform() * 50.0;
            if (challenge_point(c, 0.5, eta) != c * (1.0 + 0.5 * eta)) {
                o.fail("inexact at eta=" + std::to_string(eta));
            }
        }
    }
    return o;
}

Outcome sampling_law()
{
    Outcome o;
    Plan plan;
    plan.dot = uniform_on(10, 20);
    plan.bot = uniform_on(1, 3);
    plan.icd = semantic_distribution(2.0);
    plan.iud = semantic_distribution(2.0);
    plan.apps = DiscreteDistribution<std::string>::from_weights({"A", "B", "C"}, {1, 1, 1});
    const auto law = oracle::truncated_breadth(plan.dot, plan.bot);
    const int draws = 100000;
    std::map<int, int> counts;
    for (int s = 0; s < draws; ++s) {
        const auto p = sample_params(plan, stream_seed(7, static_cast<std::uint64_t>(s)));
        if (p.bot > p.dot) {
            o.fail("b > d");
        }
        counts[p.bot] += 1;
    }
    std::ostringstream detail;
    for (const auto& [b, prob] : law) {
        const double sd = std::sqrt(draws * prob * (1 - prob));
        const double z = (counts[b] - draws * prob) / sd;
        if (std::abs(z) > 3.0) {
            o.fail("P(b=" + std::to_string(b) + ") off by " + std::to_string(z) + " sd");
        }
    }
    return o;
}

Outcome profiling()
{
    Outcome o;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    Rng rng(3);
    const std::vector<std::string> apps = {"A", "B", "C", "D"};
    for (int round = 0; round < 100; ++round) {
        std::vector<StepOutcome> outs;
        const int trajs = static_cast<int>(rng.uniform_int(1, 5));
        for (int t = 0; t < trajs; ++t) {
            const int len = static_cast<int>(rng.uniform_int(1, 10));
            const int mi = static_cast<int>(rng.uniform_int(1, 3));
            const int ms = static_cast<int>(rng.uniform_int(1, 3));
            for (int s = 1; s <= len; ++s) {
                outs.push_back({"t" + std::to_string(t), s, apps[rng.uniform_int(0, 3)], rng.uniform() < 0.6, mi, ms});
            }
        }
        const auto want = oracle::profile(outs);
        const auto got = compute_profile(outs);
        bool same = close(got.c_d, want.c_d) && close(got.c_b, want.c_b) && close(got.c_int, want.c_int) &&
                    close(got.c_ins, want.c_ins) && close(got.v_star, want.v_star);
        for (const auto& [a, v] : want.v) {
            same = same && close(got.vulnerabilities.at(a), v);
        }
        if (!same) {
            o.fail("dataset " + std::to_string(round) + " differs from the oracle");
        }
    }
    // hand-computed cases
    std::vector<StepOutcome> two;
    for (int i = 1; i <= 3; ++i) {
        two.push_back({"t1", i, "A", true, 1, 1});
        two.push_back({"t2", i, "B", true, 1, 1});
    }
    auto p = compute_profile(two);
    if (p.c_d != 3.0 || p.c_b != 1.0 || p.vulnerabilities.at("A") != 0.0 || p.vulnerabilities.at("B") != 0.0) {
        o.fail("two-trajectory example");
    }
    p = compute_profile({{"t", 1, "A", true, 1, 1}, {"t", 2, "A", true, 1, 1}, {"t", 3, "B", false, 1, 1},
                         {"t", 4, "B", false, 1, 1}});
    if (p.c_b != 1.0 || p.vulnerabilities.at("A") != 0.0 || p.vulnerabilities.at("B") != 1.0) {
        o.fail("two-app example");
    }
    p = compute_profile({{"t", 1, "A", false, 3, 3}});
    if (p.c_d != 0.0 || p.c_int != 2.0 || p.c_ins != 2.0) {
        o.fail("fallback example");
    }
    return o;
}

Outcome matcher()
{
    Outcome o;
    Rng rng(4);
    const std::vector<std::string> texts = {"buy milk", "Buy Milk!", "buy silk", "meeting at 5", "x", "Meeting at 6"};
    const std::vector<std::string> names = {"Simple Calendar Pro", "simple-calendar pro", "Gmail", "Notes"};
    auto target = [&](bool allow_none) -> Target {
        const auto k = rng.uniform_int(allow_none ? 0 : 1, 2);
        if (k == 0) {
            return std::monostate{};
        }
        if (k == 1) {
            return ElementIndex{static_cast<int>(rng.uniform_int(0, 5))};
        }
        return Point{static_cast<double>(rng.uniform_int(0, 1000)), static_cast<double>(rng.uniform_int(0, 2000))};
    };
    auto action = [&](ActionType type) {
        switch (type) {
        case ActionType::click: return Action::click(target(false));
        case ActionType::long_press: return Action::long_press(target(false));
        case ActionType::scroll: return Action::scroll(static_cast<Direction>(rng.uniform_int(0, 3)));
        case ActionType::input_text: return Action::input_text(texts[rng.uniform_int(0, 5)], target(true));
        case ActionType::open_app: return Action::open_app(names[rng.uniform_int(0, 3)]);
        default: return Action::simple(type);
        }
    };
    std::set<ActionType> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto gt_type = static_cast<ActionType>(rng.uniform_int(0, 11));
        const auto pred_type = rng.uniform() < 0.8 ? gt_type : static_cast<ActionType>(rng.uniform_int(0, 11));
        seen.insert(gt_type);
        const Action gt = action(gt_type);
        const Action pred = action(pred_type);
        ScreenGeometry geo;
        geo.width = 1000;
        geo.height = 2000;
        for (int e = 0; e < 6; ++e) {
            const double l = static_cast<double>(rng.uniform_int(0, 800));
            const double t = static_cast<double>(rng.uniform_int(0, 1800));
            geo.elements[e] = PixelRect{l, t, l + static_cast<double>(rng.uniform_int(10, 200)),
                                        t + static_cast<double>(rng.uniform_int(10, 200))};
        }
        if (gt.has_point()) {
            geo.gt_point = gt.point();
        } else if (gt.has_index()) {
            geo.gt_point = geo.elements[gt.index()].center();
            geo.gt_bbox = geo.elements[gt.index()];
        }
        const MatchConfig cfg{0.02 + 0.2 * rng.uniform(), rng.uniform()};
        if (match_actions(pred, gt, geo, cfg) != oracle::match(pred, gt, geo, cfg.phi, cfg.anls_threshold)) {
            o.fail("case " + std::to_string(i) + " disagrees with the reference matcher");
        }
    }
    if (seen.size() != 12) {
        o.fail("not every action type was drawn");
    }
    const auto strings = oracle::short_strings(6);
    for (const auto& a : strings) {
        for (const auto& b : strings) {
            if (anls(a, b) != oracle::anls(a, b)) {
                o.fail("anls(" + a + ", " + b + ") disagrees with the DP");
            }
        }
    }
    const double threshold = 0.14 * std::sqrt(1000.0 * 1000.0 + 2000.0 * 2000.0);
    if (std::abs(threshold - 313.05) > 0.01) {
        o.fail("threshold " + std::to_string(threshold));
    }
    const ScreenGeometry g{1000, 2000, {500, 500}, std::nullopt, {}};
    if (!match_actions(Action::click(Point{800, 560}), Action::click(Point{500, 500}), g)) {
        o.fail("worked example does not match");
    }
    return o;
}

Outcome budgets()
{
    Outcome o;
    Rng rng(5);
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
            s.budgets = allocate_budgets(apps, remaining, s.weights, nullptr).budgets;
            double wsum = 0;
            for (const auto& [k, w] : s.weights) {
                wsum += w;
            }
            int bsum = 0;
            for (const auto& [k, b] : s.budgets) {
                bsum += b;
            }
            if (std::abs(wsum - 1.0) > 1e-9) {
                o.fail("weights sum to " + std::to_string(wsum));
            }
            if (bsum != remaining) {
                o.fail("budgets sum to " + std::to_string(bsum) + " of " + std::to_string(remaining));
            }
        }
    }
    return o;
}

Outcome end_to_end()
{
    Outcome o;
    test_support::TempDir tmp("acceptance");
    const std::string config = std::string(MOBILEGEN_SCENARIO_DIR) + "/mobilegen.toml";
    auto run = [&](const fs::path& dir) {
        const std::string cmd = std::string("\"") + MOBILEGEN_CLI + "\" run -q --config \"" + config + "\" --run-dir \"" +
                                dir.string() + "\" --n 50 --seed 7 > \"" + (tmp.path() / "log.txt").string() + "\" 2>&1";
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = std::system(cmd.c_str());
        return std::pair{rc, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    };
    const auto [rc, secs] = run(tmp.path() / "a");
    if (rc != 0) {
        o.fail("first run exited with " + std::to_string(rc) + ": " + read_file(tmp.path() / "log.txt"));
        return o;
    }
    if (secs >= 120.0) {
        o.fail("first run took " + std::to_string(secs) + "s");
    }
    const fs::path a = tmp.path() / "a";
    std::size_t checked = 0;
    for (const auto& dir : list_records(a / "data")) {
        const std::string bytes = read_file(dir / "trajectory.json");
        const auto t = deserialize(bytes);
        ++checked;
        const std::string id = t.id;
        if (static_cast<int>(t.steps.size()) > t.params.dot) {
            o.fail(id + ": more steps than the sampled depth");
        }
        const auto visited = apps_in_steps(t);
        if (std::set<std::string>(visited.begin(), visited.end()) !=
            std::set<std::string>(t.params.app_set.begin(), t.params.app_set.end())) {
            o.fail(id + ": visited apps differ from the sampled set");
        }
        if (serialize(deserialize(bytes)) != bytes) {
            o.fail(id + ": serialization is not byte-identical");
        }
        if (t.instruction.empty()) {
            o.fail(id + ": no instruction");
        } else if (auto missing = missing_instruction_term(t, t.instruction)) {
            o.fail(id + ": instruction lacks \"" + *missing + "\"");
        }
    }
    if (checked == 0) {
        o.fail("no trajectories produced");
    }
    const auto [rc2, secs2] = run(tmp.path() / "b");
    (void)secs2;
    if (rc2 != 0) {
        o.fail("second run exited with " + std::to_string(rc2));
        return o;
    }
    const auto kept_a = read_file(a / "kept.txt");
    const auto kept_b = read_file(tmp.path() / "b" / "kept.txt");
    if (kept_a != kept_b) {
        o.fail("kept ids differ between runs");
    }
    std::size_t kept = 0;
    for (char c : kept_a) {
        kept += c == '\n' ? 1 : 0;
    }
    if (o.ok) {
        o.detail = std::to_string(checked) + " trajectories, " + std::to_string(kept) + " kept, first run " +
                   std::to_string(static_cast<int>(secs)) + "s";
    }
    return o;
}

Outcome prior_grid()
{
    Outcome o;
    const auto params = build_prior_plan(10, {"A", "B", "C", "D", "E"}, 11);
    if (params.size() != 90) {
        o.fail(std::to_string(params.size()) + " params");
    }
    std::map<std::pair<int, DifficultyLevel>, int> cells;
    std::map<DifficultyLevel, int> iud;
    for (const auto& p : params) {
        cells[{p.bot, p.icd}] += 1;
        iud[p.iud] += 1;
        const bool in_range = (p.bot == 1 && p.dot >= 10 && p.dot <= 15) ||
                              (p.bot == 2 && p.dot >= 16 && p.dot <= 25) || (p.bot == 3 && p.dot >= 26 && p.dot <= 35);
        if (!in_range || !validate_params(p).empty()) {
            o.fail("out-of-range cell dot=" + std::to_string(p.dot) + " bot=" + std::to_string(p.bot));
        }
    }
    if (cells.size() != 9) {
        o.fail("expected 9 cells");
    }
    for (const auto& [cell, n] : cells) {
        if (n != 10) {
            o.fail("cell with " + std::to_string(n) + " params");
        }
    }
    const double sd = std::sqrt(90.0 * (1.0 / 3) * (2.0 / 3));
    for (auto level : kAllLevels) {
        if (std::abs(iud[level] - 30) > 3 * sd) {
            o.fail("IUD level count " + std::to_string(iud[level]));
        }
    }
    return o;
}

// Forwards to the simulator and keeps the observations it hands out.
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

Outcome rollback()
{
    Outcome o;
    const std::string stay = "Reason: loop\nAction: {\"action_type\": \"click\", \"index\": 1}";
    const std::string next = "Reason: move\nAction: {\"action_type\": \"click\", \"index\": 0}";
    const DifficultyParams params{5, 1, DifficultyLevel::easy, DifficultyLevel::easy, {"Tiny"}};

    // a repeated no-effect action, one backtrack to step 1, then progress
    {
        RecordingEnv env({test_support::simple_app("Tiny")});
        MockClient explorer;
        explorer.on(prompt_contains("Step budget for this app:"), {stay, stay, next, next, next});
        MockClient sup;
        sup.on(prompt_contains("monitoring agent behavior for loops"),
               {"Backtrack to step 1", "No backtrack needed", "No backtrack needed"});
        sup.on([](const ChatRequest&) { return true; }, [](const ChatRequest&) { return std::string("ok"); });
        McgConfig cfg;
        cfg.gamma = 1;
        const auto r = run_trajectory("rb", params, env, explorer, sup, cfg);
        if (r.status != RunStatus::complete) {
            o.fail("fixture run " + std::string(to_string(r.status)) + ": " + r.message);
        }
        if (r.rollbacks != 1 || env.restores.size() != 1) {
            o.fail("expected exactly one rollback");
        } else if (env.restores[0] != env.steps.at(1)) {
            o.fail("restored observation differs from the step-1 snapshot");
        }
        if (r.trajectory.steps.size() < 2 || r.trajectory.steps[1].action != Action::click(ElementIndex{0})) {
            o.fail("rolled-back step still present");
        }
    }
    // a loop that never ends hits the cap
    {
        RecordingEnv env({test_support::simple_app("Tiny")});
        MockClient explorer;
        explorer.on(prompt_contains("Step budget for this app:"), [&](const ChatRequest&) { return stay; });
        MockClient sup;
        sup.on(prompt_contains("monitoring agent behavior for loops"),
               [](const ChatRequest&) { return std::string("Backtrack to step 1"); });
        sup.on([](const ChatRequest&) { return true; }, [](const ChatRequest&) { return std::string("ok"); });
        const DifficultyParams long_run{30, 1, DifficultyLevel::easy, DifficultyLevel::easy, {"Tiny"}};
        const auto r = run_trajectory("cap", long_run, env, explorer, sup);
        if (r.rollbacks > 3 || env.restores.size() > 3) {
            o.fail("rollback cap exceeded");
        }
        if (r.rollbacks != 3) {
            o.fail("cap fixture performed " + std::to_string(r.rollbacks) + " rollbacks");
        }
    }
    return o;
}

}  // namespace

int main()
{
    criterion("distribution correctness", 5, distributions);
    criterion("challenge point", 1, challenge);
    criterion("sampling law", 10, sampling_law);
    criterion("profiling closed forms", 5, profiling);
    criterion("matcher oracle equivalence", 30, matcher);
    criterion("budget algebra", 5, budgets);
    criterion("end-to-end mock run", 300, end_to_end);
    criterion("prior grid", 1, prior_grid);
    criterion("rollback correctness", 5, rollback);
    return failures;
}
