#include "mobilegen/sampling.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/rng.hpp"

namespace mobilegen {

namespace {

template <typename T>
const T& draw(Rng& rng, const DiscreteDistribution<T>& d)
{
    return d.support[rng.categorical(d.probs)];
}

}  // namespace

SampledParams sample_params_checked(const Plan& plan, std::uint64_t seed, int max_bot)
{
    Rng rng(seed);
    SampledParams out;
    auto& p = out.params;
    p.dot = draw(rng, plan.dot);

    std::vector<double> feasible(plan.bot.probs.size(), 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < plan.bot.support.size(); ++i) {
        if (plan.bot.support[i] >= 1 && plan.bot.support[i] <= p.dot &&
            plan.bot.support[i] <= max_bot) {
            feasible[i] = plan.bot.probs[i];
            mass += feasible[i];
        }
    }
    if (mass > 0.0) {
        p.bot = plan.bot.support[rng.categorical(feasible)];
    } else {
        // keep the stream aligned with the regular path
        (void)rng.uniform();
        p.bot = 1;
        out.bot_fallback = true;
    }
    p.icd = draw(rng, plan.icd);
    p.iud = draw(rng, plan.iud);
    return out;
}

DifficultyParams sample_params(const Plan& plan, std::uint64_t seed, int max_bot)
{
    return sample_params_checked(plan, seed, max_bot).params;
}

std::vector<std::string> sample_app_set(const DiscreteDistribution<std::string>& apps, int b, std::uint64_t seed)
{
    if (apps.support.empty()) {
        throw Error(ErrorCode::empty_app_set, "app distribution is empty");
    }
    std::size_t available = 0;
    for (double p : apps.probs) {
        available += p > 0.0 ? 1 : 0;
    }
    if (b < 1 || static_cast<std::size_t>(b) > available) {
        throw Error(ErrorCode::insufficient_apps, "cannot draw " + std::to_string(b) + " distinct apps from " +
                                                      std::to_string(available) + " with positive probability");
    }
    Rng rng(seed);
    std::vector<double> weights = apps.probs;
    std::vector<std::string> out;
    for (int k = 0; k < b; ++k) {
        const std::size_t i = rng.categorical(weights);
        out.push_back(apps.support[i]);
        weights[i] = 0.0;
    }
    return out;
}

DifficultyParams sample_trajectory_params(const Plan& plan, std::uint64_t seed, std::uint64_t index)
{
    const std::uint64_t stream = stream_seed(seed, index);
    int selectable = 0;
    for (double w : plan.apps.probs) {
        selectable += w > 0.0 ? 1 : 0;
    }
    DifficultyParams p = sample_params(plan, stream, selectable);
    p.app_set = sample_app_set(plan.apps, p.bot, mix64(stream));
    return p;
}

}  // namespace mobilegen
