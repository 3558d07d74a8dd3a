#include "mobilegen/matching.hpp"

#include "mobilegen/error.hpp"
#include "utf8.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace mobilegen {

namespace {

const std::unordered_map<std::string, ActionType>& alias_table()
{
    static const std::unordered_map<std::string, ActionType> table = {
        {"tap", ActionType::click},
        {"touch", ActionType::click},
        {"press", ActionType::click},
        {"single_tap", ActionType::click},
        {"long_click", ActionType::long_press},
        {"longpress", ActionType::long_press},
        {"long_tap", ActionType::long_press},
        {"type", ActionType::input_text},
        {"input", ActionType::input_text},
        {"type_text", ActionType::input_text},
        {"enter_text", ActionType::input_text},
        {"swipe", ActionType::scroll},
        {"home", ActionType::navigate_home},
        {"press_home", ActionType::navigate_home},
        {"go_home", ActionType::navigate_home},
        {"back", ActionType::navigate_back},
        {"press_back", ActionType::navigate_back},
        {"go_back", ActionType::navigate_back},
        {"launch", ActionType::open_app},
        {"launch_app", ActionType::open_app},
        {"open", ActionType::open_app},
        {"enter", ActionType::keyboard_enter},
        {"press_enter", ActionType::keyboard_enter},
        {"done", ActionType::terminate},
        {"finish", ActionType::terminate},
    };
    return table;
}

std::vector<char32_t> code_points(std::string_view s)
{
    return detail::decode_utf8(s);
}

// Spatial condition for click / long_press / input_text. Index-vs-index
// compares indices; anything else needs a point for the prediction.
bool spatial_ok(const Action& pred, const Action& gt, const ScreenGeometry* geom, const MatchConfig& cfg)
{
    if (pred.has_index() && gt.has_index()) {
        return pred.index() == gt.index();
    }
    if (std::holds_alternative<std::monostate>(pred.target)) {
        return false;
    }
    if (geom == nullptr) {
        throw Error(ErrorCode::geometry_missing,
                    std::string("spatial rule for ") + std::string(to_string(gt.type)) + " needs screen geometry");
    }
    Point p;
    if (pred.has_point()) {
        p = pred.point();
    } else {
        auto it = geom->elements.find(pred.index());
        if (it == geom->elements.end()) {
            return false;
        }
        p = it->second.center();
    }
    if (geom->gt_bbox && geom->gt_bbox->contains(p)) {
        return true;
    }
    const double dx = p.x - geom->gt_point.x;
    const double dy = p.y - geom->gt_point.y;
    const double diagonal = std::sqrt(geom->width * geom->width + geom->height * geom->height);
    return std::sqrt(dx * dx + dy * dy) / diagonal <= cfg.phi;
}

}  // namespace

void MatchConfig::validate() const
{
    if (!(phi > 0.0 && phi <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "phi must lie in (0, 1]");
    }
    if (!(anls_threshold >= 0.0 && anls_threshold <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "anls_threshold must lie in [0, 1]");
    }
}

void ScreenGeometry::validate() const
{
    if (!(width > 0.0 && height > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "screen geometry needs positive width and height");
    }
    if (gt_point.x < 0.0 || gt_point.x > width || gt_point.y < 0.0 || gt_point.y > height) {
        throw Error(ErrorCode::invalid_argument, "gt_point lies outside the screen");
    }
}

std::string canonicalize(std::string_view s)
{
    std::string out;
    for (char32_t cp : code_points(s)) {
        if (cp >= U'A' && cp <= U'Z') {
            out.push_back(static_cast<char>(cp - U'A' + U'a'));
        } else if ((cp >= U'a' && cp <= U'z') || (cp >= U'0' && cp <= U'9')) {
            out.push_back(static_cast<char>(cp));
        } else if (cp == U'\u212A') {
            // KELVIN SIGN lowercases to ASCII 'k'.
            out.push_back('k');
        } else if (cp == U'\u0130') {
            // LATIN CAPITAL I WITH DOT ABOVE lowercases to 'i' + U+0307; the mark is dropped.
            out.push_back('i');
        }
    }
    return out;
}

ActionType map_alias(std::string_view raw_type)
{
    std::string key;
    for (char c : raw_type) {
        if (c == ' ' || c == '-') {
            key.push_back('_');
        } else {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    while (!key.empty() && key.front() == '_') {
        key.erase(key.begin());
    }
    while (!key.empty() && key.back() == '_') {
        key.pop_back();
    }
    if (auto canonical = action_type_from_name(key)) {
        return *canonical;
    }
    const auto& table = alias_table();
    if (auto it = table.find(key); it != table.end()) {
        return it->second;
    }
    throw Error(ErrorCode::unknown_action_type, "'" + std::string(raw_type) + "'");
}

std::size_t levenshtein(std::string_view a, std::string_view b)
{
    const auto x = code_points(a);
    const auto y = code_points(b);
    std::vector<std::size_t> prev(y.size() + 1);
    std::vector<std::size_t> cur(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) {
        prev[j] = j;
    }
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const std::size_t subst = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

double anls(std::string_view a, std::string_view b)
{
    const std::size_t longest = std::max(code_points(a).size(), code_points(b).size());
    if (longest == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::string_view to_string(MatchRule rule) noexcept
{
    switch (rule) {
    case MatchRule::type_mismatch: return "type_mismatch";
    case MatchRule::spatial: return "spatial";
    case MatchRule::text_and_spatial: return "text_and_spatial";
    case MatchRule::direction: return "direction";
    case MatchRule::app_name: return "app_name";
    case MatchRule::type_identity: return "type_identity";
    }
    return "unknown";
}

MatchResult evaluate_match(const Action& pred, const Action& gt, const ScreenGeometry* geom, const MatchConfig& cfg)
{
    if (pred.type != gt.type) {
        return {false, MatchRule::type_mismatch};
    }
    switch (gt.type) {
    case ActionType::click:
    case ActionType::long_press:
        return {spatial_ok(pred, gt, geom, cfg), MatchRule::spatial};
    case ActionType::input_text: {
        const double score = anls(canonicalize(pred.text.value_or("")), canonicalize(gt.text.value_or("")));
        if (score < cfg.anls_threshold) {
            return {false, MatchRule::text_and_spatial};
        }
        // A ground truth typed into the focused field has no spatial component.
        if (std::holds_alternative<std::monostate>(gt.target)) {
            return {true, MatchRule::text_and_spatial};
        }
        return {spatial_ok(pred, gt, geom, cfg), MatchRule::text_and_spatial};
    }
    case ActionType::scroll:
        return {pred.direction == gt.direction, MatchRule::direction};
    case ActionType::open_app:
        return {canonicalize(pred.app_name.value_or("")) == canonicalize(gt.app_name.value_or("")),
                MatchRule::app_name};
    default:
        return {true, MatchRule::type_identity};
    }
}

bool match_actions(const Action& pred, const Action& gt, const std::optional<ScreenGeometry>& geom,
                   const MatchConfig& cfg)
{
    return evaluate_match(pred, gt, geom ? &*geom : nullptr, cfg).matched;
}

ScreenGeometry geometry_from_json(const nlohmann::json& j)
{
    auto rect = [](const nlohmann::json& r) {
        if (!r.is_array() || r.size() != 4) {
            throw Error(ErrorCode::schema_violation, "bbox must be [left, top, right, bottom]");
        }
        return PixelRect{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    };
    try {
        ScreenGeometry g;
        g.width = j.at("width").get<double>();
        g.height = j.at("height").get<double>();
        const auto& p = j.at("gt_point");
        g.gt_point = Point{p.at(0).get<double>(), p.at(1).get<double>()};
        if (auto it = j.find("gt_bbox"); it != j.end() && !it->is_null()) {
            g.gt_bbox = rect(*it);
        }
        if (auto it = j.find("elements"); it != j.end() && !it->is_null()) {
            for (const auto& [key, value] : it->items()) {
                g.elements[std::stoi(key)] = rect(value);
            }
        }
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("geometry: ") + e.what());
    }
}

nlohmann::ordered_json geometry_to_json(const ScreenGeometry& g)
{
    auto rect = [](const PixelRect& r) { return nlohmann::ordered_json::array({r.left, r.top, r.right, r.bottom}); };
    nlohmann::ordered_json j;
    j["width"] = g.width;
    j["height"] = g.height;
    j["gt_point"] = {g.gt_point.x, g.gt_point.y};
    j["gt_bbox"] = g.gt_bbox ? rect(*g.gt_bbox) : nlohmann::ordered_json(nullptr);
    if (!g.elements.empty()) {
        nlohmann::ordered_json e = nlohmann::ordered_json::object();
        for (const auto& [idx, r] : g.elements) {
            e[std::to_string(idx)] = rect(r);
        }
        j["elements"] = e;
    }
    return j;
}

}  // namespace mobilegen
