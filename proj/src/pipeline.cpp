#include "mobilegen/pipeline.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/http_client.hpp"
#include "mobilegen/mcg.hpp"
#include "mobilegen/rng.hpp"
#include "mobilegen/sampling.hpp"
#include "mobilegen/scenario_mock.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace mobilegen {

std::unique_ptr<ChatClient> make_client(const ModelConfig& cfg)
{
    if (cfg.backend == "mock") {
        return make_scenario_client();
    }
    if (cfg.backend != "http") {
        throw Error(ErrorCode::invalid_config, "unknown model backend " + cfg.backend);
    }
    HttpClientConfig http = HttpClientConfig::from_env();
    if (!cfg.endpoint.empty()) {
        http.endpoint = cfg.endpoint;
    }
    if (!cfg.model.empty()) {
        http.model = cfg.model;
    }
    if (http.endpoint.empty()) {
        throw Error(ErrorCode::invalid_config, "http backend needs model.endpoint or MOBILEGEN_MODEL_ENDPOINT");
    }
    http.timeout = std::chrono::milliseconds(cfg.timeout_ms);
    http.max_retries = cfg.max_retries;
    http.max_in_flight = cfg.max_in_flight;
    return std::make_unique<HttpChatClient>(std::move(http));
}

std::vector<AppGraph> load_apps(const fs::path& dir)
{
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::invalid_config, "apps directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<AppGraph> graphs;
    for (const auto& f : files) {
        graphs.push_back(load_app_graph(read_file(f)));
    }
    if (graphs.empty()) {
        throw Error(ErrorCode::invalid_config, "no app graphs in " + dir.string());
    }
    return graphs;
}

namespace {

std::vector<std::string> app_names(const std::vector<AppGraph>& graphs)
{
    std::vector<std::string> names;
    for (const auto& g : graphs) {
        names.push_back(g.app);
    }
    return names;
}

void report(const Progress& progress, const std::string& line)
{
    if (progress) {
        progress(line);
    }
}

bool selected(const std::vector<std::string>* only, const std::string& id)
{
    return !only || std::find(only->begin(), only->end(), id) != only->end();
}

}  // namespace

std::vector<DifficultyParams> build_prior_plan(int n_per_cell, const std::vector<std::string>& apps,
                                               std::uint64_t seed)
{
    if (n_per_cell < 1) {
        throw Error(ErrorCode::invalid_argument, "prior grid needs at least one trajectory per cell");
    }
    struct Level {
        int dot_lo, dot_hi, bot;
    };
    constexpr Level structural[] = {{10, 15, 1}, {16, 25, 2}, {26, 35, 3}};
    if (apps.size() < 3) {
        throw Error(ErrorCode::insufficient_apps, "prior grid needs at least three apps");
    }
    const auto uniform_apps = DiscreteDistribution<std::string>::from_weights(
        apps, std::vector<double>(apps.size(), 1.0));

    std::vector<DifficultyParams> out;
    std::uint64_t index = 0;
    for (const auto& level : structural) {
        for (DifficultyLevel icd : kAllLevels) {
            for (int k = 0; k < n_per_cell; ++k, ++index) {
                const std::uint64_t stream = stream_seed(seed, index);
                Rng rng(stream);
                DifficultyParams p;
                p.dot = static_cast<int>(rng.uniform_int(level.dot_lo, level.dot_hi));
                p.bot = level.bot;
                p.icd = icd;
                p.iud = kAllLevels[rng.uniform_int(0, 2)];
                p.app_set = sample_app_set(uniform_apps, p.bot, mix64(stream));
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

std::string trajectory_id(const std::string& prefix, std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04zu", index + 1);
    return prefix + "-" + buf;
}

void write_params_jsonl(const fs::path& path, const std::vector<IdParams>& items)
{
    std::string out;
    for (const auto& item : items) {
        nlohmann::ordered_json j{{"id", item.id}};
        const auto params = params_to_json(item.params);
        for (const auto& [k, v] : params.items()) {
            j[k] = v;
        }
        out += j.dump() + "\n";
    }
    write_file(path, out);
}

std::vector<std::string> read_lines(const fs::path& path)
{
    std::vector<std::string> lines;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines) {
        out += l + "\n";
    }
    write_file(path, out);
}

namespace {

nlohmann::json parse_line(const fs::path& path, const std::string& line, std::size_t number)
{
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation,
                    path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
}

}  // namespace

std::vector<IdParams> read_params_jsonl(const fs::path& path)
{
    std::vector<IdParams> items;
    std::size_t number = 0;
    for (const auto& line : read_lines(path)) {
        auto j = parse_line(path, line, ++number);
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
            throw Error(ErrorCode::schema_violation, path.string() + ":" + std::to_string(number) + ": missing id");
        }
        IdParams item;
        item.id = j["id"].get<std::string>();
        j.erase("id");
        item.params = params_from_json(j);
        items.push_back(std::move(item));
    }
    return items;
}

void write_status_jsonl(const fs::path& path, const std::vector<ItemStatus>& items)
{
    std::vector<std::string> lines;
    for (const auto& s : items) {
        nlohmann::ordered_json j{{"id", s.id}, {"status", s.status}, {"message", s.message}, {"rollbacks", s.rollbacks}};
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::vector<ItemStatus> read_status_jsonl(const fs::path& path)
{
    std::vector<ItemStatus> items;
    std::size_t number = 0;
    for (const auto& line : read_lines(path)) {
        auto j = parse_line(path, line, ++number);
        try {
            items.push_back({j.at("id").get<std::string>(), j.at("status").get<std::string>(),
                             j.value("message", std::string{}), j.value("rollbacks", 0)});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::schema_violation, path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return items;
}

std::vector<ItemStatus> generate_stage(const std::vector<IdParams>& items, const std::vector<AppGraph>& apps,
                                       ChatClient& model, const GenerationConfig& cfg, int workers,
                                       const fs::path& out_dir, const Progress& progress)
{
    std::vector<ItemStatus> statuses(items.size());
    const McgConfig mcg = cfg.mcg();
    detail::parallel_for(items.size(), workers, [&](std::size_t i) {
        const auto& item = items[i];
        SimulatedEnvironment env(apps);
        GenerationResult result = run_trajectory(item.id, item.params, env, model, model, mcg);
        ItemStatus& s = statuses[i];
        s.id = item.id;
        s.status = std::string(to_string(result.status));
        s.message = result.message;
        s.rollbacks = result.rollbacks;
        if (result.status == RunStatus::complete) {
            TrajectoryRecord rec{std::move(result.trajectory), std::move(result.before),
                                 std::move(result.final_observation)};
            write_record(out_dir / item.id, rec);
        }
        report(progress, "generate " + item.id + ": " + s.status +
                             (s.message.empty() ? std::string() : " (" + s.message + ")"));
    });
    return statuses;
}

std::vector<ItemStatus> synthesize_stage(const fs::path& raw_dir, const fs::path& out_dir, ChatClient& model,
                                         const GenerationConfig& cfg, int workers,
                                         const std::vector<std::string>* only, const Progress& progress)
{
    std::vector<fs::path> dirs;
    for (const auto& d : list_records(raw_dir)) {
        if (selected(only, d.filename().string())) {
            dirs.push_back(d);
        }
    }
    std::vector<ItemStatus> statuses(dirs.size());
    detail::parallel_for(dirs.size(), workers, [&](std::size_t i) {
        ItemStatus& s = statuses[i];
        s.id = dirs[i].filename().string();
        TrajectoryRecord rec = read_record(dirs[i]);
        Trajectory& t = rec.trajectory;
        s.status = "synthesized";
        try {
            for (std::size_t pos = 0; pos < t.steps.size() && s.status == "synthesized"; ++pos) {
                auto thought = synthesize_thought(rec.before[pos], t.steps[pos].action, rec.after(pos), model,
                                                  cfg.temperature, cfg.attach_screenshots);
                if (!thought) {
                    s.status = "unsynthesized";
                    s.message = "no thought for step " + std::to_string(t.steps[pos].index);
                } else {
                    t.steps[pos].thought = *thought;
                }
            }
            if (s.status == "synthesized") {
                t.instruction = synthesize_instruction(t, t.params.iud, model, cfg.temperature);
            }
        } catch (const Error& e) {
            s.status = e.code() == ErrorCode::constraint_violated ? "constraint_violated" : "failed";
            s.message = e.what();
        }
        if (s.status == "synthesized") {
            const fs::path dest = out_dir / s.id;
            fs::remove_all(dest);
            fs::create_directories(dest.parent_path());
            fs::copy(dirs[i], dest, fs::copy_options::recursive);
            write_trajectory_json(dest, t);
        }
        report(progress, "synthesize " + s.id + ": " + s.status);
    });
    return statuses;
}

std::vector<PriorStep> load_prior_steps(const fs::path& prior_dir, bool with_images)
{
    std::vector<PriorStep> steps;
    for (const auto& dir : list_records(prior_dir)) {
        TrajectoryRecord rec = read_record(dir);
        const Trajectory& t = rec.trajectory;
        if (t.instruction.empty()) {
            continue;
        }
        std::vector<std::string> history;
        std::vector<std::string> latest;
        for (std::size_t pos = 0; pos < t.steps.size(); ++pos) {
            const Step& step = t.steps[pos];
            PriorStep p;
            p.trajectory_id = t.id;
            p.step_index = step.index;
            p.app = step.app;
            p.instruction = t.instruction;
            p.icd = t.params.icd;
            p.iud = t.params.iud;
            p.history = history;
            p.latest.assign(latest.size() > 3 ? latest.end() - 3 : latest.begin(), latest.end());
            p.observation = rec.before[pos];
            if (with_images && !step.observation.som_screenshot.empty() &&
                fs::exists(dir / step.observation.som_screenshot)) {
                p.som_png = read_file(dir / step.observation.som_screenshot);
            }
            p.ground_truth = step.action;
            steps.push_back(std::move(p));

            history.push_back(step.summary.value_or(action_compact(step.action)));
            latest.push_back("Step " + std::to_string(step.index) + ": Reason: " + step.thought.value_or("") +
                             " Action: " + action_compact(step.action));
        }
    }
    return steps;
}

void bootstrap_prior(const fs::path& prior_dir, const std::vector<AppGraph>& apps, ChatClient& model,
                     const Config& cfg, const Progress& progress)
{
    const auto grid = build_prior_plan(cfg.profiling.prior_per_cell, app_names(apps), mix64(cfg.seed ^ 0x9A1C3E5DULL));
    std::vector<IdParams> items;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        items.push_back({trajectory_id("prior", i), grid[i]});
    }
    fs::path raw = prior_dir;
    raw += "_raw";
    fs::remove_all(raw);
    fs::remove_all(prior_dir);
    generate_stage(items, apps, model, cfg.generation, cfg.workers, raw, progress);
    synthesize_stage(raw, prior_dir, model, cfg.generation, cfg.workers, nullptr, progress);
    fs::create_directories(prior_dir);
}

CapabilityProfile profile_stage(const fs::path& prior_dir, ChatClient& student, const ProfilingConfig& cfg,
                                const MatchConfig& match, std::vector<StepOutcome>* outcomes)
{
    const auto steps = load_prior_steps(prior_dir);
    if (steps.empty()) {
        throw Error(ErrorCode::empty_dataset, "prior dataset has no synthesized trajectories: " + prior_dir.string());
    }
    ProfilingOptions opts;
    opts.k = cfg.k;
    opts.temperature = cfg.temperature;
    opts.max_concurrency = cfg.concurrency;
    opts.match = match;
    auto results = evaluate_prior(student, steps, opts);
    CapabilityProfile profile = compute_profile(results);
    if (outcomes) {
        *outcomes = std::move(results);
    }
    return profile;
}

std::vector<IdParams> sample_stage(const Plan& plan, int n, std::uint64_t seed, std::size_t first_index)
{
    if (n < 0) {
        throw Error(ErrorCode::invalid_argument, "n must be non-negative");
    }
    std::vector<IdParams> items;
    for (std::size_t i = first_index; i < first_index + static_cast<std::size_t>(n); ++i) {
        items.push_back({trajectory_id("traj", i), sample_trajectory_params(plan, seed, i)});
    }
    return items;
}

std::vector<QualityReport> judge_stage(const fs::path& data_dir, ChatClient& judge, const QualityConfig& cfg,
                                       int workers, const std::vector<std::string>* only, const Progress& progress)
{
    std::vector<fs::path> dirs;
    for (const auto& d : list_records(data_dir)) {
        if (selected(only, d.filename().string())) {
            dirs.push_back(d);
        }
    }
    JudgeOptions opts;
    opts.screenshots = cfg.screenshots;
    std::vector<QualityReport> reports(dirs.size());
    detail::parallel_for(dirs.size(), workers, [&](std::size_t i) {
        TrajectoryRecord rec = read_record(dirs[i]);
        Trajectory& t = rec.trajectory;
        if (t.instruction.empty()) {
            throw Error(ErrorCode::invalid_argument, "trajectory " + t.id + " has not been synthesized");
        }
        QualityReport& r = reports[i];
        r.trajectory_id = t.id;
        for (std::size_t pos = 0; pos < t.steps.size(); ++pos) {
            const Step& step = t.steps[pos];
            StepContext ctx;
            ctx.instruction = t.instruction;
            ctx.action = step.action;
            ctx.reasoning = step.thought.value_or("");
            ctx.element = target_element(rec.before[pos], step.action);
            ctx.before = &rec.before[pos];
            ctx.after = &rec.after(pos);
            Judgement j = judge_step(ctx, judge, opts);
            r.step_scores.push_back({step.index, j.score, j.reason});
        }
        Judgement whole = judge_trajectory(t, rec.before, rec.final_observation, judge, opts);
        r.trajectory_score = whole.score;
        r.trajectory_reason = whole.reason;
        r.kept = whole.score > cfg.threshold;
        t.quality = QualityScores{r.step_scores, r.trajectory_score, r.trajectory_reason};
        write_trajectory_json(dirs[i], t);
        report(progress, "judge " + t.id + ": " + std::to_string(r.trajectory_score));
    });
    return reports;
}

void write_reports_jsonl(const fs::path& path, const std::vector<QualityReport>& reports)
{
    std::vector<std::string> lines;
    for (const auto& r : reports) {
        lines.push_back(report_to_json(r).dump());
    }
    write_lines(path, lines);
}

std::vector<QualityReport> read_reports_jsonl(const fs::path& path)
{
    std::vector<QualityReport> reports;
    std::size_t number = 0;
    for (const auto& line : read_lines(path)) {
        reports.push_back(report_from_json(parse_line(path, line, ++number)));
    }
    return reports;
}

nlohmann::ordered_json manifest_to_json(const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["requested"] = m.requested;
    j["generated"] = m.generated;
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : m.stages) {
        nlohmann::ordered_json e{{"name", s.name}, {"status", s.status}, {"artifact", s.artifact}};
        if (!s.message.empty()) {
            e["message"] = s.message;
        }
        j["stages"].push_back(e);
    }
    j["trajectories"] = nlohmann::ordered_json::array();
    std::set<std::string> kept(m.kept.begin(), m.kept.end());
    for (const auto& t : m.trajectories) {
        j["trajectories"].push_back({{"id", t.id},
                                     {"status", t.status},
                                     {"message", t.message},
                                     {"rollbacks", t.rollbacks},
                                     {"kept", kept.contains(t.id)}});
    }
    j["kept"] = m.kept;
    return j;
}

std::string config_hash(const Config& cfg)
{
    // FNV-1a over the canonical rendering; where the run lives does not matter
    Config canonical = cfg;
    canonical.run_dir.clear();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : render_config(canonical)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Final status per generated trajectory: the generator status, replaced by
// the synthesis status for the ones that got that far.
std::vector<ItemStatus> merge_statuses(const std::vector<ItemStatus>& generated,
                                       const std::vector<ItemStatus>& synthesized)
{
    std::vector<ItemStatus> out = generated;
    for (auto& s : out) {
        for (const auto& t : synthesized) {
            if (t.id == s.id && t.status != "synthesized") {
                s.status = t.status;
                s.message = t.message;
            }
        }
    }
    return out;
}

std::vector<std::string> ids_with(const std::vector<ItemStatus>& items, std::string_view status)
{
    std::vector<std::string> ids;
    for (const auto& s : items) {
        if (s.status == status) {
            ids.push_back(s.id);
        }
    }
    return ids;
}

template <typename T>
void append(std::vector<T>& to, const std::vector<T>& from)
{
    to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

RunManifest run_pipeline(const Config& cfg, const Progress& progress)
{
    cfg.validate();
    const fs::path run = cfg.resolve(cfg.run_dir);
    fs::create_directories(run);
    const auto apps = load_apps(cfg.resolve(cfg.apps_dir));
    auto model = make_client(cfg.model);

    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.seed = cfg.seed;
    manifest.requested = cfg.n;

    const fs::path manifest_path = run / "manifest.json";
    if (fs::exists(manifest_path)) {
        auto previous = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
        if (!previous.is_object() || previous.value("config_hash", std::string{}) != manifest.config_hash) {
            // a different configuration invalidates every cached artifact
            report(progress, "configuration changed; starting over");
            for (const char* name : {"profile.json", "outcomes.jsonl", "plan.json", "params.jsonl", "generate.jsonl",
                                     "synthesize.jsonl", "reports.jsonl", "kept.txt"}) {
                fs::remove(run / name);
            }
            if (cfg.profiling.prior_dir.empty()) {
                fs::remove_all(run / "prior");
            }
        }
    }

    // Once a stage runs, every later stage runs too.
    bool dirty = false;
    auto stage = [&](const std::string& name, const fs::path& artifact, const std::function<void()>& body) {
        if (!dirty && fs::exists(artifact)) {
            manifest.stages.push_back({name, "cached", fs::relative(artifact, run).string(), ""});
            report(progress, name + ": cached");
            return;
        }
        dirty = true;
        report(progress, name + ": running");
        try {
            body();
        } catch (const std::exception& e) {
            manifest.stages.push_back({name, "failed", fs::relative(artifact, run).string(), e.what()});
            write_file(manifest_path, manifest_to_json(manifest).dump(2) + "\n");
            throw;
        }
        manifest.stages.push_back({name, "completed", fs::relative(artifact, run).string(), ""});
    };

    const fs::path prior_dir = cfg.profiling.prior_dir.empty() ? run / "prior" : cfg.resolve(cfg.profiling.prior_dir);
    stage("profile", run / "profile.json", [&] {
        if (list_records(prior_dir).empty()) {
            if (!cfg.profiling.prior_dir.empty()) {
                throw Error(ErrorCode::empty_dataset, "prior dataset is empty: " + prior_dir.string());
            }
            report(progress, "bootstrapping prior dataset");
            bootstrap_prior(prior_dir, apps, *model, cfg, progress);
        }
        std::vector<StepOutcome> outcomes;
        auto profile = profile_stage(prior_dir, *model, cfg.profiling, cfg.matching, &outcomes);
        std::vector<std::string> lines;
        for (const auto& o : outcomes) {
            lines.push_back(nlohmann::ordered_json{{"trajectory_id", o.trajectory_id},
                                                   {"step", o.step_index},
                                                   {"app", o.app},
                                                   {"passed", o.passed}}
                                .dump());
        }
        write_lines(run / "outcomes.jsonl", lines);
        write_file(run / "profile.json", profile_to_json(profile).dump(2) + "\n");
    });

    stage("plan", run / "plan.json", [&] {
        auto profile = profile_from_json(nlohmann::json::parse(read_file(run / "profile.json")));
        write_file(run / "plan.json", plan_to_json(make_plan(profile, cfg.challenge)).dump(2) + "\n");
    });
    const Plan plan = plan_from_json(nlohmann::json::parse(read_file(run / "plan.json")));

    stage("sample", run / "params.jsonl",
          [&] { write_params_jsonl(run / "params.jsonl", sample_stage(plan, cfg.n, cfg.seed)); });
    std::vector<IdParams> items = read_params_jsonl(run / "params.jsonl");

    stage("generate", run / "generate.jsonl", [&] {
        fs::remove_all(run / "raw");
        write_status_jsonl(run / "generate.jsonl",
                           generate_stage(items, apps, *model, cfg.generation, cfg.workers, run / "raw", progress));
    });
    std::vector<ItemStatus> generated = read_status_jsonl(run / "generate.jsonl");

    stage("synthesize", run / "synthesize.jsonl", [&] {
        fs::remove_all(run / "data");
        const auto ids = ids_with(generated, "complete");
        write_status_jsonl(run / "synthesize.jsonl",
                           synthesize_stage(run / "raw", run / "data", *model, cfg.generation, cfg.workers, &ids,
                                            progress));
    });
    std::vector<ItemStatus> synthesized = read_status_jsonl(run / "synthesize.jsonl");

    stage("judge", run / "reports.jsonl", [&] {
        const auto ids = ids_with(synthesized, "synthesized");
        write_reports_jsonl(run / "reports.jsonl",
                            judge_stage(run / "data", *model, cfg.quality, cfg.workers, &ids, progress));
    });
    std::vector<QualityReport> reports = read_reports_jsonl(run / "reports.jsonl");

    stage("filter", run / "kept.txt", [&] { write_lines(run / "kept.txt", filter_dataset(reports, cfg.quality.threshold)); });
    std::vector<std::string> kept = read_lines(run / "kept.txt");

    // Oversample in batches of n until enough trajectories survive the filter.
    if (cfg.target_kept > 0) {
        const int cap = cfg.max_generated > 0 ? cfg.max_generated : std::max(cfg.n, 4 * cfg.target_kept);
        while (static_cast<int>(kept.size()) < cfg.target_kept && static_cast<int>(items.size()) < cap) {
            const int batch = std::min(cfg.n, cap - static_cast<int>(items.size()));
            report(progress, "kept " + std::to_string(kept.size()) + " of " + std::to_string(cfg.target_kept) +
                                 "; generating " + std::to_string(batch) + " more");
            auto more = sample_stage(plan, batch, cfg.seed, items.size());
            auto more_generated = generate_stage(more, apps, *model, cfg.generation, cfg.workers, run / "raw", progress);
            const auto complete = ids_with(more_generated, "complete");
            auto more_synthesized = synthesize_stage(run / "raw", run / "data", *model, cfg.generation, cfg.workers,
                                                     &complete, progress);
            const auto ready = ids_with(more_synthesized, "synthesized");
            auto more_reports = judge_stage(run / "data", *model, cfg.quality, cfg.workers, &ready, progress);
            append(items, more);
            append(generated, more_generated);
            append(synthesized, more_synthesized);
            append(reports, more_reports);
            kept = filter_dataset(reports, cfg.quality.threshold);
            write_status_jsonl(run / "generate.jsonl", generated);
            write_status_jsonl(run / "synthesize.jsonl", synthesized);
            write_reports_jsonl(run / "reports.jsonl", reports);
            write_params_jsonl(run / "params.jsonl", items);
            write_lines(run / "kept.txt", kept);
        }
    }

    if (!kept.empty()) {
        std::vector<Trajectory> kept_trajectories;
        for (const auto& id : kept) {
            kept_trajectories.push_back(deserialize(read_file(run / "data" / id / "trajectory.json")));
        }
        const auto stats = compute_stats(kept_trajectories);
        write_file(run / "stats.json", stats_to_json(stats).dump(2) + "\n");
        write_file(run / "stats.csv", stats_to_csv(stats));
    }

    manifest.generated = static_cast<int>(items.size());
    manifest.trajectories = merge_statuses(generated, synthesized);
    manifest.kept = kept;
    write_file(manifest_path, manifest_to_json(manifest).dump(2) + "\n");
    return manifest;
}

}  // namespace mobilegen
