#include "mobilegen/config.hpp"

#include "mobilegen/dataset.hpp"
#include "mobilegen/error.hpp"

#include <toml.hpp>

#include <set>
#include <sstream>

namespace mobilegen {

McgConfig GenerationConfig::mcg() const
{
    McgConfig c;
    c.gamma = gamma;
    c.penalty = penalty;
    c.cycle_window = static_cast<std::size_t>(cycle_window);
    c.max_rollbacks = max_rollbacks;
    c.history_words = history_words;
    c.action_words = action_words;
    c.explorer_retries = explorer_retries;
    c.temperature = temperature;
    c.attach_screenshots = attach_screenshots;
    return c;
}

bool operator==(const Config& a, const Config& b)
{
    auto challenge_eq = [](const ChallengeConfig& x, const ChallengeConfig& y) {
        return x.alpha == y.alpha && x.eta_d == y.eta_d && x.eta_b == y.eta_b && x.eta_int == y.eta_int &&
               x.eta_ins == y.eta_ins && x.sigma_d == y.sigma_d && x.sigma_b == y.sigma_b && x.sigma_a == y.sigma_a;
    };
    return a.seed == b.seed && a.n == b.n && a.workers == b.workers && a.run_dir == b.run_dir &&
           a.apps_dir == b.apps_dir && a.target_kept == b.target_kept && a.max_generated == b.max_generated &&
           challenge_eq(a.challenge, b.challenge) && a.profiling == b.profiling && a.generation == b.generation &&
           a.matching.phi == b.matching.phi && a.matching.anls_threshold == b.matching.anls_threshold &&
           a.quality == b.quality && a.model == b.model;
}

void Config::validate() const
{
    challenge.validate();
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw Error(ErrorCode::invalid_config, what);
        }
    };
    require(n >= 1, "n must be at least 1");
    require(workers >= 1, "workers must be at least 1");
    require(target_kept >= 0 && max_generated >= 0, "target_kept and max_generated must be non-negative");
    require(profiling.k >= 1, "profiling.k must be at least 1");
    require(profiling.temperature >= 0.0, "profiling.temperature must be non-negative");
    require(profiling.concurrency >= 1, "profiling.concurrency must be at least 1");
    require(profiling.prior_per_cell >= 1, "profiling.prior_per_cell must be at least 1");
    require(generation.temperature >= 0.0, "generation.temperature must be non-negative");
    require(generation.gamma >= 0, "generation.gamma must be non-negative");
    require(generation.penalty > 0.0 && generation.penalty < 1.0, "generation.penalty must lie in (0, 1)");
    require(generation.cycle_window >= 2, "generation.cycle_window must be at least 2");
    require(generation.max_rollbacks >= 0, "generation.max_rollbacks must be non-negative");
    require(generation.history_words >= 1 && generation.action_words >= 1, "summary word caps must be positive");
    require(generation.explorer_retries >= 0, "generation.explorer_retries must be non-negative");
    require(quality.threshold >= 1 && quality.threshold <= 10, "quality.threshold must lie in [1, 10]");
    require(quality.screenshots >= 1, "quality.screenshots must be at least 1");
    require(model.backend == "mock" || model.backend == "http", "model.backend must be 'mock' or 'http'");
    require(model.timeout_ms > 0 && model.max_retries >= 0 && model.max_in_flight >= 1, "bad model limits");
    try {
        matching.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::invalid_config, e.what());
    }
}

std::filesystem::path Config::resolve(const std::string& p) const
{
    std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) {
        return path;
    }
    return base_dir / path;
}

namespace {

class Reader {
public:
    Reader(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

    ~Reader() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0) {
            return;
        }
        for (const auto& [key, node] : table_) {
            if (!seen_.contains(std::string(key.str()))) {
                throw Error(ErrorCode::invalid_config, "unknown key " + prefix_ + std::string(key.str()));
            }
        }
    }

    void get(const char* key, double& out)
    {
        if (auto* node = mark(key)) {
            if (auto v = node->value<double>()) {
                out = *v;
            } else {
                fail(key, "a number");
            }
        }
    }
    void get(const char* key, int& out)
    {
        if (auto* node = mark(key)) {
            auto v = node->value_exact<std::int64_t>();
            if (!v || *v < INT32_MIN || *v > INT32_MAX) {
                fail(key, "an integer");
            }
            out = static_cast<int>(*v);
        }
    }
    void get(const char* key, std::uint64_t& out)
    {
        if (auto* node = mark(key)) {
            auto v = node->value_exact<std::int64_t>();
            if (!v || *v < 0) {
                fail(key, "a non-negative integer");
            }
            out = static_cast<std::uint64_t>(*v);
        }
    }
    void get(const char* key, bool& out)
    {
        if (auto* node = mark(key)) {
            auto v = node->value_exact<bool>();
            if (!v) {
                fail(key, "a boolean");
            }
            out = *v;
        }
    }
    void get(const char* key, std::string& out)
    {
        if (auto* node = mark(key)) {
            auto v = node->value_exact<std::string>();
            if (!v) {
                fail(key, "a string");
            }
            out = *v;
        }
    }
    const toml::table* table(const char* key)
    {
        if (auto* node = mark(key)) {
            if (auto* t = node->as_table()) {
                return t;
            }
            fail(key, "a table");
        }
        return nullptr;
    }

private:
    const toml::node* mark(const char* key)
    {
        seen_.insert(key);
        return table_.get(key);
    }
    [[noreturn]] void fail(const char* key, const char* what)
    {
        throw Error(ErrorCode::invalid_config, prefix_ + key + " must be " + what);
    }

    const toml::table& table_;
    std::string prefix_;
    std::set<std::string> seen_;
};

}  // namespace

Config parse_config(std::string_view toml_text)
{
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << e.description() << " at line " << e.source().begin.line;
        throw Error(ErrorCode::invalid_config, msg.str());
    }

    Config c;
    {
        Reader r(root, "");
        r.get("seed", c.seed);
        r.get("n", c.n);
        r.get("workers", c.workers);
        r.get("run_dir", c.run_dir);
        r.get("apps_dir", c.apps_dir);
        r.get("target_kept", c.target_kept);
        r.get("max_generated", c.max_generated);
        if (auto* t = r.table("challenge")) {
            Reader s(*t, "challenge.");
            s.get("alpha", c.challenge.alpha);
            s.get("eta_d", c.challenge.eta_d);
            s.get("eta_b", c.challenge.eta_b);
            s.get("eta_int", c.challenge.eta_int);
            s.get("eta_ins", c.challenge.eta_ins);
            s.get("sigma_d", c.challenge.sigma_d);
            s.get("sigma_b", c.challenge.sigma_b);
            s.get("sigma_a", c.challenge.sigma_a);
        }
        if (auto* t = r.table("profiling")) {
            Reader s(*t, "profiling.");
            s.get("k", c.profiling.k);
            s.get("temperature", c.profiling.temperature);
            s.get("concurrency", c.profiling.concurrency);
            s.get("prior_dir", c.profiling.prior_dir);
            s.get("prior_per_cell", c.profiling.prior_per_cell);
        }
        if (auto* t = r.table("generation")) {
            Reader s(*t, "generation.");
            s.get("temperature", c.generation.temperature);
            s.get("gamma", c.generation.gamma);
            s.get("penalty", c.generation.penalty);
            s.get("cycle_window", c.generation.cycle_window);
            s.get("max_rollbacks", c.generation.max_rollbacks);
            s.get("history_words", c.generation.history_words);
            s.get("action_words", c.generation.action_words);
            s.get("explorer_retries", c.generation.explorer_retries);
            s.get("attach_screenshots", c.generation.attach_screenshots);
        }
        if (auto* t = r.table("matching")) {
            Reader s(*t, "matching.");
            s.get("phi", c.matching.phi);
            s.get("anls_threshold", c.matching.anls_threshold);
        }
        if (auto* t = r.table("quality")) {
            Reader s(*t, "quality.");
            s.get("threshold", c.quality.threshold);
            s.get("screenshots", c.quality.screenshots);
        }
        if (auto* t = r.table("model")) {
            Reader s(*t, "model.");
            s.get("backend", c.model.backend);
            s.get("endpoint", c.model.endpoint);
            s.get("model", c.model.model);
            s.get("timeout_ms", c.model.timeout_ms);
            s.get("max_retries", c.model.max_retries);
            s.get("max_in_flight", c.model.max_in_flight);
        }
    }
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path)
{
    Config c = parse_config(read_file(path));
    c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return c;
}

std::string render_config(const Config& c)
{
    toml::table root{
        {"seed", static_cast<std::int64_t>(c.seed)},
        {"n", c.n},
        {"workers", c.workers},
        {"run_dir", c.run_dir},
        {"apps_dir", c.apps_dir},
        {"target_kept", c.target_kept},
        {"max_generated", c.max_generated},
        {"challenge",
         toml::table{
             {"alpha", c.challenge.alpha},
             {"eta_d", c.challenge.eta_d},
             {"eta_b", c.challenge.eta_b},
             {"eta_int", c.challenge.eta_int},
             {"eta_ins", c.challenge.eta_ins},
             {"sigma_d", c.challenge.sigma_d},
             {"sigma_b", c.challenge.sigma_b},
             {"sigma_a", c.challenge.sigma_a},
         }},
        {"profiling",
         toml::table{
             {"k", c.profiling.k},
             {"temperature", c.profiling.temperature},
             {"concurrency", c.profiling.concurrency},
             {"prior_dir", c.profiling.prior_dir},
             {"prior_per_cell", c.profiling.prior_per_cell},
         }},
        {"generation",
         toml::table{
             {"temperature", c.generation.temperature},
             {"gamma", c.generation.gamma},
             {"penalty", c.generation.penalty},
             {"cycle_window", c.generation.cycle_window},
             {"max_rollbacks", c.generation.max_rollbacks},
             {"history_words", c.generation.history_words},
             {"action_words", c.generation.action_words},
             {"explorer_retries", c.generation.explorer_retries},
             {"attach_screenshots", c.generation.attach_screenshots},
         }},
        {"matching",
         toml::table{
             {"phi", c.matching.phi},
             {"anls_threshold", c.matching.anls_threshold},
         }},
        {"quality",
         toml::table{
             {"threshold", c.quality.threshold},
             {"screenshots", c.quality.screenshots},
         }},
        {"model",
         toml::table{
             {"backend", c.model.backend},
             {"endpoint", c.model.endpoint},
             {"model", c.model.model},
             {"timeout_ms", c.model.timeout_ms},
             {"max_retries", c.model.max_retries},
             {"max_in_flight", c.model.max_in_flight},
         }},
    };
    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

}  // namespace mobilegen
