#pragma once

#include "mobilegen/action.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobilegen {

struct MatchConfig {
    double phi = 0.14;            // tolerance as a fraction of the screen diagonal
    double anls_threshold = 0.5;  // minimum ANLS for input_text

    void validate() const;
};

// Closed pixel rectangle; boundary pixels count as inside.
struct PixelRect {
    double left = 0.0;
    double top = 0.0;
    double right = 0.0;
    double bottom = 0.0;

    bool contains(Point p) const
    {
        return p.x >= left && p.x <= right && p.y >= top && p.y <= bottom;
    }
    Point center() const { return {(left + right) / 2.0, (top + bottom) / 2.0}; }

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct ScreenGeometry {
    double width = 0.0;
    double height = 0.0;
    Point gt_point;
    std::optional<PixelRect> gt_bbox;
    // Optional index -> bbox table, used to place index-based predictions
    // when the ground truth is coordinate-based.
    std::map<int, PixelRect> elements;

    void validate() const;
};

std::string canonicalize(std::string_view s);

ActionType map_alias(std::string_view raw_type);

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - Lev(a, b) / max(|a|, |b|) over Unicode code points; 1.0 for two empty strings.
double anls(std::string_view a, std::string_view b);

enum class MatchRule {
    type_mismatch,
    spatial,
    text_and_spatial,
    direction,
    app_name,
    type_identity,
};

std::string_view to_string(MatchRule rule) noexcept;

struct MatchResult {
    bool matched = false;
    MatchRule rule = MatchRule::type_mismatch;
};

MatchResult evaluate_match(const Action& pred, const Action& gt, const ScreenGeometry* geom,
                           const MatchConfig& cfg = {});

bool match_actions(const Action& pred, const Action& gt, const std::optional<ScreenGeometry>& geom,
                   const MatchConfig& cfg = {});

ScreenGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::ordered_json geometry_to_json(const ScreenGeometry& g);

}  // namespace mobilegen
