#include "mobilegen/config.hpp"
#include "mobilegen/dataset.hpp"
#include "mobilegen/distribution.hpp"
#include "mobilegen/error.hpp"
#include "mobilegen/matching.hpp"
#include "mobilegen/pipeline.hpp"
#include "mobilegen/quality.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace mobilegen;

namespace {

struct Common {
    std::string config;
    std::string backend;
    std::optional<int> workers;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool backend)
{
    cmd->add_option("--config", c.config, "TOML configuration file")->check(CLI::ExistingFile);
    if (backend) {
        cmd->add_option("--backend", c.backend, "model backend")->check(CLI::IsMember({"mock", "http"}));
        cmd->add_option("--workers", c.workers, "parallel trajectories")->check(CLI::PositiveNumber);
    }
    cmd->add_flag("-q,--quiet", c.quiet, "no progress output");
}

Config load(const Common& c)
{
    Config cfg = c.config.empty() ? Config{} : load_config(c.config);
    if (!c.backend.empty()) {
        cfg.model.backend = c.backend;
    }
    if (c.workers) {
        cfg.workers = *c.workers;
    }
    cfg.validate();
    return cfg;
}

Progress progress_for(const Common& c)
{
    if (c.quiet) {
        return {};
    }
    return [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
}

nlohmann::json load_json(const std::string& path)
{
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, path + ": " + e.what());
    }
}

void write_json(const std::string& path, const nlohmann::ordered_json& j)
{
    write_file(path, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Difficulty-controlled mobile GUI trajectory generation"};
    app.require_subcommand(1);

    Common common;

    // profile
    std::string prior_dir;
    std::optional<int> k;
    std::string profile_out = "profile.json";
    auto* profile = app.add_subcommand("profile", "estimate the student capability profile on a prior dataset");
    add_common(profile, common, true);
    profile->add_option("--prior", prior_dir, "prior dataset directory")->required();
    profile->add_option("--k", k, "samples per step (Pass@k)")->check(CLI::PositiveNumber);
    profile->add_option("--out", profile_out, "profile JSON");

    // plan
    std::string plan_profile;
    std::string plan_out = "plan.json";
    auto* plan = app.add_subcommand("plan", "derive target difficulty distributions from a profile");
    add_common(plan, common, false);
    plan->add_option("--profile", plan_profile, "profile JSON")->required()->check(CLI::ExistingFile);
    plan->add_option("--out", plan_out, "plan JSON");

    // sample
    std::string sample_plan;
    std::optional<int> n;
    std::optional<std::uint64_t> seed;
    std::string sample_out = "params.jsonl";
    auto* sample = app.add_subcommand("sample", "draw per-trajectory difficulty parameters");
    add_common(sample, common, false);
    sample->add_option("--plan", sample_plan, "plan JSON")->required()->check(CLI::ExistingFile);
    sample->add_option("--n", n, "trajectories")->check(CLI::NonNegativeNumber);
    sample->add_option("--seed", seed, "run seed");
    sample->add_option("--out", sample_out, "parameters, one JSON object per line");

    // generate
    std::string gen_plan;
    std::string gen_params;
    std::string gen_apps;
    std::string gen_out = "raw";
    auto* generate = app.add_subcommand("generate", "run the explorer/supervisor loop for sampled parameters");
    add_common(generate, common, true);
    auto* plan_opt = generate->add_option("--plan", gen_plan, "plan JSON (parameters are sampled)")
                         ->check(CLI::ExistingFile);
    auto* params_opt = generate->add_option("--params", gen_params, "pre-sampled parameters (JSONL)")
                           ->check(CLI::ExistingFile);
    plan_opt->excludes(params_opt);
    generate->add_option("--n", n, "trajectories")->check(CLI::NonNegativeNumber);
    generate->add_option("--seed", seed, "run seed");
    generate->add_option("--apps", gen_apps, "app graph directory")->check(CLI::ExistingDirectory);
    generate->add_option("--out", gen_out, "output directory");

    // synthesize
    std::string syn_data = "raw";
    std::string syn_out = "data";
    auto* synthesize = app.add_subcommand("synthesize", "add step thoughts and task instructions");
    add_common(synthesize, common, true);
    synthesize->add_option("--data", syn_data, "generated trajectories")->check(CLI::ExistingDirectory);
    synthesize->add_option("--out", syn_out, "output directory");

    // judge
    std::string judge_data = "data";
    std::string judge_out = "reports.jsonl";
    auto* judge = app.add_subcommand("judge", "score steps and trajectories");
    add_common(judge, common, true);
    judge->add_option("--data", judge_data, "synthesized trajectories")->check(CLI::ExistingDirectory);
    judge->add_option("--out", judge_out, "reports, one JSON object per line");

    // filter
    std::string filter_reports = "reports.jsonl";
    std::optional<int> threshold;
    std::string filter_out = "kept.txt";
    auto* filter = app.add_subcommand("filter", "keep trajectories scoring above the threshold");
    add_common(filter, common, false);
    filter->add_option("--reports", filter_reports, "judge reports")->check(CLI::ExistingFile);
    filter->add_option("--threshold", threshold, "minimum score, exclusive");
    filter->add_option("--out", filter_out, "kept ids, one per line");

    // stats
    std::string stats_data = "data";
    std::string stats_out = "stats";
    auto* stats = app.add_subcommand("stats", "dataset statistics as JSON and CSV");
    add_common(stats, common, false);
    stats->add_option("--data", stats_data, "dataset directory")->check(CLI::ExistingDirectory);
    stats->add_option("--out", stats_out, "output path without extension");

    // run
    std::string run_dir;
    auto* run = app.add_subcommand("run", "all stages, resuming from existing artifacts");
    add_common(run, common, true);
    run->add_option("--run-dir", run_dir, "override run_dir");
    run->add_option("--n", n, "override n")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override seed");

    // match
    std::string pred_path;
    std::string gt_path;
    std::string geom_path;
    std::optional<double> phi;
    auto* match = app.add_subcommand("match", "compare a predicted action with the ground truth");
    match->add_option("pred", pred_path, "predicted action JSON")->required()->check(CLI::ExistingFile);
    match->add_option("gt", gt_path, "ground-truth action JSON")->required()->check(CLI::ExistingFile);
    match->add_option("geometry", geom_path, "screen geometry JSON")->check(CLI::ExistingFile);
    match->add_option("--phi", phi, "distance tolerance as a fraction of the diagonal");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*profile) {
            Config cfg = load(common);
            if (k) {
                cfg.profiling.k = *k;
            }
            auto model = make_client(cfg.model);
            std::vector<StepOutcome> outcomes;
            auto p = profile_stage(prior_dir, *model, cfg.profiling, cfg.matching, &outcomes);
            write_json(profile_out, profile_to_json(p));
            std::printf("profiled %zu steps in %zu trajectories\n", p.steps, p.trajectories);
        } else if (*plan) {
            Config cfg = load(common);
            auto p = make_plan(profile_from_json(load_json(plan_profile)), cfg.challenge);
            write_json(plan_out, plan_to_json(p));
            std::printf("challenge points: d=%.4f b=%.4f icd=%.4f iud=%.4f\n", p.challenge.d, p.challenge.b,
                        p.challenge.icd, p.challenge.iud);
        } else if (*sample) {
            Config cfg = load(common);
            auto items = sample_stage(plan_from_json(load_json(sample_plan)), n.value_or(cfg.n), seed.value_or(cfg.seed));
            write_params_jsonl(sample_out, items);
            std::printf("sampled %zu parameter sets\n", items.size());
        } else if (*generate) {
            Config cfg = load(common);
            std::vector<IdParams> items;
            if (!gen_params.empty()) {
                items = read_params_jsonl(gen_params);
            } else if (!gen_plan.empty()) {
                items = sample_stage(plan_from_json(load_json(gen_plan)), n.value_or(cfg.n), seed.value_or(cfg.seed));
            } else {
                throw Error(ErrorCode::invalid_argument, "generate needs --plan or --params");
            }
            const auto apps = load_apps(gen_apps.empty() ? cfg.resolve(cfg.apps_dir) : fs::path(gen_apps));
            auto model = make_client(cfg.model);
            auto statuses = generate_stage(items, apps, *model, cfg.generation, cfg.workers, gen_out,
                                           progress_for(common));
            fs::create_directories(gen_out);
            write_status_jsonl(fs::path(gen_out) / "generate.jsonl", statuses);
            RunManifest m;
            m.config_hash = config_hash(cfg);
            m.seed = seed.value_or(cfg.seed);
            m.requested = static_cast<int>(items.size());
            m.generated = m.requested;
            m.stages.push_back({"generate", "completed", "generate.jsonl", ""});
            m.trajectories = statuses;
            write_json((fs::path(gen_out) / "manifest.json").string(), manifest_to_json(m));
            int complete = 0;
            for (const auto& s : statuses) {
                complete += s.status == "complete" ? 1 : 0;
            }
            std::printf("generated %d complete of %zu\n", complete, statuses.size());
        } else if (*synthesize) {
            Config cfg = load(common);
            auto model = make_client(cfg.model);
            auto statuses = synthesize_stage(syn_data, syn_out, *model, cfg.generation, cfg.workers, nullptr,
                                             progress_for(common));
            fs::create_directories(syn_out);
            write_status_jsonl(fs::path(syn_out) / "synthesize.jsonl", statuses);
            int done = 0;
            for (const auto& s : statuses) {
                done += s.status == "synthesized" ? 1 : 0;
            }
            std::printf("synthesized %d of %zu\n", done, statuses.size());
        } else if (*judge) {
            Config cfg = load(common);
            auto model = make_client(cfg.model);
            auto reports = judge_stage(judge_data, *model, cfg.quality, cfg.workers, nullptr, progress_for(common));
            write_reports_jsonl(judge_out, reports);
            std::printf("judged %zu trajectories\n", reports.size());
        } else if (*filter) {
            Config cfg = load(common);
            auto kept = filter_dataset(read_reports_jsonl(filter_reports), threshold.value_or(cfg.quality.threshold));
            write_lines(filter_out, kept);
            std::printf("kept %zu\n", kept.size());
        } else if (*stats) {
            auto s = export_stats(stats_data);
            write_json(stats_out + ".json", stats_to_json(s));
            write_file(stats_out + ".csv", stats_to_csv(s));
            std::printf("%zu trajectories\n", s.trajectories);
        } else if (*run) {
            Config cfg = load(common);
            if (!run_dir.empty()) {
                cfg.run_dir = fs::absolute(run_dir).string();
            }
            if (n) {
                cfg.n = *n;
            }
            if (seed) {
                cfg.seed = *seed;
            }
            auto m = run_pipeline(cfg, progress_for(common));
            std::printf("generated %d, kept %zu\n", m.generated, m.kept.size());
        } else if (*match) {
            MatchConfig mc;
            if (phi) {
                mc.phi = *phi;
            }
            const Action pred = action_from_json(load_json(pred_path));
            const Action gt = action_from_json(load_json(gt_path));
            std::optional<ScreenGeometry> geom;
            if (!geom_path.empty()) {
                geom = geometry_from_json(load_json(geom_path));
            }
            auto result = evaluate_match(pred, gt, geom ? &*geom : nullptr, mc);
            std::printf("%s %s\n", result.matched ? "MATCH" : "NO_MATCH", std::string(to_string(result.rule)).c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
