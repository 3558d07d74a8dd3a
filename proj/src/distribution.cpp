#include "mobilegen/distribution.hpp"

#include <array>
#include <limits>

namespace mobilegen {

void ChallengeConfig::validate() const
{
    const std::pair<const char*, double> fields[] = {
        {"alpha", alpha},   {"eta_d", eta_d},     {"eta_b", eta_b},     {"eta_int", eta_int},
        {"eta_ins", eta_ins}, {"sigma_d", sigma_d}, {"sigma_b", sigma_b}, {"sigma_a", sigma_a},
    };
    for (const auto& [name, value] : fields) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw Error(ErrorCode::invalid_config, std::string(name) + " must be a positive number");
        }
    }
}

double challenge_point(double c, double alpha, double eta)
{
    if (c < 0.0 || !(alpha > 0.0) || !(eta > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "challenge point needs c >= 0, alpha > 0, eta > 0");
    }
    return c * (1.0 + alpha * eta);
}

DiscreteDistribution<int> structural_distribution(double c_star, double sigma, int support_min, int support_max)
{
    if (support_min > support_max) {
        throw Error(ErrorCode::empty_support,
                    "empty integer window [" + std::to_string(support_min) + ", " + std::to_string(support_max) + "]");
    }
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "kernel width must be positive");
    }
    std::vector<int> support;
    std::vector<double> weights;
    for (int x = support_min; x <= support_max; ++x) {
        const double z = (x - c_star) / sigma;
        support.push_back(x);
        weights.push_back(std::exp(-0.5 * z * z));
    }
    return DiscreteDistribution<int>::from_weights(std::move(support), std::move(weights));
}

namespace {

int ceil_to_int(double v)
{
    const double c = std::ceil(v);
    if (c > std::numeric_limits<int>::max() / 2) {
        throw Error(ErrorCode::invalid_argument, "challenge point too large");
    }
    return static_cast<int>(c);
}

}  // namespace

std::pair<int, int> dot_window(double c_star, double sigma)
{
    return {std::max(1, ceil_to_int(c_star - 3.0 * sigma)), std::max(1, ceil_to_int(c_star + 3.0 * sigma))};
}

std::pair<int, int> bot_window(double c_star, double sigma)
{
    return {1, std::max(1, ceil_to_int(c_star + 3.0 * sigma))};
}

std::array<double, 3> semantic_memberships(double c_star, const SemanticAnchors& a)
{
    if (!(a.c_min < a.c_mid && a.c_mid < a.c_max)) {
        throw Error(ErrorCode::degenerate_anchors, "semantic anchors must be strictly increasing");
    }
    const double c = std::clamp(c_star, a.c_min, a.c_max);
    const double easy = std::clamp((a.c_mid - c) / (a.c_mid - a.c_min), 0.0, 1.0);
    const double medium =
        std::max(0.0, std::min((c - a.c_min) / (a.c_mid - a.c_min), (a.c_max - c) / (a.c_max - a.c_mid)));
    const double hard = std::clamp((c - a.c_mid) / (a.c_max - a.c_mid), 0.0, 1.0);
    return {easy, medium, hard};
}

DiscreteDistribution<DifficultyLevel> semantic_distribution(double c_star, const SemanticAnchors& anchors)
{
    const auto mu = semantic_memberships(c_star, anchors);
    return DiscreteDistribution<DifficultyLevel>::from_weights(
        {DifficultyLevel::easy, DifficultyLevel::medium, DifficultyLevel::hard}, {mu[0], mu[1], mu[2]});
}

DiscreteDistribution<std::string> app_selection_distribution(const std::map<std::string, double>& normalized,
                                                             double v_star, double sigma_a)
{
    if (normalized.empty()) {
        throw Error(ErrorCode::empty_app_set, "no apps to select from");
    }
    if (!(sigma_a > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "sigma_a must be positive");
    }
    std::vector<std::string> apps;
    std::vector<double> weights;
    for (const auto& [app, v] : normalized) {
        const double z = (v - v_star) / sigma_a;
        apps.push_back(app);
        weights.push_back(std::exp(-0.5 * z * z));
    }
    return DiscreteDistribution<std::string>::from_weights(std::move(apps), std::move(weights));
}

Plan make_plan(const CapabilityProfile& profile, const ChallengeConfig& cfg)
{
    cfg.validate();
    Plan plan;
    plan.challenge.d = challenge_point(profile.c_d, cfg.alpha, cfg.eta_d);
    plan.challenge.b = challenge_point(profile.c_b, cfg.alpha, cfg.eta_b);
    plan.challenge.icd = challenge_point(profile.c_int, cfg.alpha, cfg.eta_int);
    plan.challenge.iud = challenge_point(profile.c_ins, cfg.alpha, cfg.eta_ins);

    const auto [dlo, dhi] = dot_window(plan.challenge.d, cfg.sigma_d);
    plan.dot = structural_distribution(plan.challenge.d, cfg.sigma_d, dlo, dhi);
    const auto [blo, bhi] = bot_window(plan.challenge.b, cfg.sigma_b);
    plan.bot = structural_distribution(plan.challenge.b, cfg.sigma_b, blo, bhi);
    plan.icd = semantic_distribution(plan.challenge.icd);
    plan.iud = semantic_distribution(plan.challenge.iud);
    auto normalized = profile.normalized_vulnerabilities.empty()
                          ? normalize_vulnerabilities(profile.vulnerabilities)
                          : profile.normalized_vulnerabilities;
    plan.apps = app_selection_distribution(normalized, profile.v_star, cfg.sigma_a);
    return plan;
}

namespace {

template <typename T, typename ToJson>
nlohmann::ordered_json dist_to_json(const DiscreteDistribution<T>& d, ToJson to_json)
{
    nlohmann::ordered_json j;
    j["support"] = nlohmann::ordered_json::array();
    for (const auto& v : d.support) {
        j["support"].push_back(to_json(v));
    }
    j["probs"] = d.probs;
    return j;
}

template <typename T, typename FromJson>
DiscreteDistribution<T> dist_from_json(const nlohmann::json& j, FromJson from_json)
{
    DiscreteDistribution<T> d;
    for (const auto& v : j.at("support")) {
        d.support.push_back(from_json(v));
    }
    d.probs = j.at("probs").get<std::vector<double>>();
    d.validate();
    return d;
}

DifficultyLevel level_from_json(const nlohmann::json& v)
{
    auto level = level_from_name(v.get<std::string>());
    if (!level) {
        throw Error(ErrorCode::schema_violation, "unknown difficulty level " + v.dump());
    }
    return *level;
}

}  // namespace

nlohmann::ordered_json plan_to_json(const Plan& plan)
{
    nlohmann::ordered_json j;
    j["challenge_points"] = {
        {"d", plan.challenge.d}, {"b", plan.challenge.b}, {"icd", plan.challenge.icd}, {"iud", plan.challenge.iud}};
    auto ident = [](const auto& v) { return v; };
    auto level = [](DifficultyLevel l) { return std::string(to_string(l)); };
    j["dot"] = dist_to_json(plan.dot, ident);
    j["bot"] = dist_to_json(plan.bot, ident);
    j["icd"] = dist_to_json(plan.icd, level);
    j["iud"] = dist_to_json(plan.iud, level);
    j["apps"] = dist_to_json(plan.apps, ident);
    return j;
}

Plan plan_from_json(const nlohmann::json& j)
{
    try {
        Plan plan;
        if (j.contains("challenge_points")) {
            const auto& c = j.at("challenge_points");
            plan.challenge = {c.at("d").get<double>(), c.at("b").get<double>(), c.at("icd").get<double>(),
                              c.at("iud").get<double>()};
        }
        plan.dot = dist_from_json<int>(j.at("dot"), [](const nlohmann::json& v) { return v.get<int>(); });
        plan.bot = dist_from_json<int>(j.at("bot"), [](const nlohmann::json& v) { return v.get<int>(); });
        plan.icd = dist_from_json<DifficultyLevel>(j.at("icd"), level_from_json);
        plan.iud = dist_from_json<DifficultyLevel>(j.at("iud"), level_from_json);
        plan.apps = dist_from_json<std::string>(j.at("apps"),
                                                [](const nlohmann::json& v) { return v.get<std::string>(); });
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("plan: ") + e.what());
    }
}

}  // namespace mobilegen
