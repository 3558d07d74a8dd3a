#pragma once

#include "mobilegen/error.hpp"
#include "mobilegen/profiling.hpp"
#include "mobilegen/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace mobilegen {

template <typename T>
struct DiscreteDistribution {
    std::vector<T> support;
    std::vector<double> probs;

    // Normalizes non-negative weights. Throws EmptySupport for no support or
    // zero total mass.
    static DiscreteDistribution from_weights(std::vector<T> support, std::vector<double> weights)
    {
        if (support.empty() || support.size() != weights.size()) {
            throw Error(ErrorCode::empty_support, "distribution needs a non-empty support with one weight per value");
        }
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw Error(ErrorCode::invalid_argument, "distribution weights must be finite and non-negative");
            }
            total += w;
        }
        if (total <= 0.0) {
            throw Error(ErrorCode::empty_support, "distribution has zero total mass");
        }
        for (double& w : weights) {
            w /= total;
        }
        return {std::move(support), std::move(weights)};
    }

    double prob(const T& value) const
    {
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (support[i] == value) {
                return probs[i];
            }
        }
        return 0.0;
    }

    void validate() const
    {
        if (support.empty() || support.size() != probs.size()) {
            throw Error(ErrorCode::empty_support, "distribution support and probabilities disagree");
        }
        double total = 0.0;
        for (double p : probs) {
            if (p < 0.0 || !std::isfinite(p)) {
                throw Error(ErrorCode::schema_violation, "negative or non-finite probability");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw Error(ErrorCode::schema_violation, "probabilities do not sum to 1");
        }
    }
};

struct ChallengeConfig {
    double alpha = 0.5;
    double eta_d = 6.0;
    double eta_b = 1.0;
    double eta_int = 0.8;
    double eta_ins = 0.8;
    double sigma_d = 3.0;
    double sigma_b = 0.5;
    double sigma_a = 1.0;

    void validate() const;
};

double challenge_point(double c, double alpha, double eta);

// Gaussian kernel over the integers [support_min, support_max].
DiscreteDistribution<int> structural_distribution(double c_star, double sigma, int support_min, int support_max);

// Integer windows around the challenge point (three kernel widths each side;
// the breadth window always starts at one app).
std::pair<int, int> dot_window(double c_star, double sigma);
std::pair<int, int> bot_window(double c_star, double sigma);

struct SemanticAnchors {
    double c_min = 1.0;
    double c_mid = 2.0;
    double c_max = 3.0;
};

// Triangular memberships (easy, medium, hard) after clamping c_star into the
// anchor range. Throws DegenerateAnchors unless c_min < c_mid < c_max.
std::array<double, 3> semantic_memberships(double c_star, const SemanticAnchors& anchors = {});
DiscreteDistribution<DifficultyLevel> semantic_distribution(double c_star, const SemanticAnchors& anchors = {});

DiscreteDistribution<std::string> app_selection_distribution(const std::map<std::string, double>& normalized,
                                                             double v_star, double sigma_a);

struct ChallengePoints {
    double d = 0.0;
    double b = 0.0;
    double icd = 0.0;
    double iud = 0.0;
};

struct Plan {
    ChallengePoints challenge;
    DiscreteDistribution<int> dot;
    DiscreteDistribution<int> bot;
    DiscreteDistribution<DifficultyLevel> icd;
    DiscreteDistribution<DifficultyLevel> iud;
    DiscreteDistribution<std::string> apps;
};

Plan make_plan(const CapabilityProfile& profile, const ChallengeConfig& cfg);

nlohmann::ordered_json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);

}  // namespace mobilegen
