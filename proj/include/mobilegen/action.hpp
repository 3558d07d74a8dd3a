#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace mobilegen {

// The first nine types form the generation action space. terminate, answer and
// status exist only so evaluation traces can be represented.
enum class ActionType {
    click,
    long_press,
    scroll,
    input_text,
    navigate_home,
    navigate_back,
    open_app,
    wait,
    keyboard_enter,
    terminate,
    answer,
    status,
};

enum class Direction { up, down, left, right };

struct ElementIndex {
    int value = 0;
    friend bool operator==(const ElementIndex&, const ElementIndex&) = default;
};

// Pixel coordinates on the screenshot.
struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

using Target = std::variant<std::monostate, ElementIndex, Point>;

struct Action {
    ActionType type = ActionType::wait;
    Target target;
    std::optional<std::string> text;
    std::optional<Direction> direction;
    std::optional<std::string> app_name;

    friend bool operator==(const Action&, const Action&) = default;

    bool has_index() const { return std::holds_alternative<ElementIndex>(target); }
    bool has_point() const { return std::holds_alternative<Point>(target); }
    int index() const { return std::get<ElementIndex>(target).value; }
    Point point() const { return std::get<Point>(target); }

    static Action click(Target t);
    static Action long_press(Target t);
    static Action scroll(Direction d, Target t = {});
    static Action input_text(std::string text, Target t = {});
    static Action open_app(std::string name);
    static Action simple(ActionType type);
};

std::string_view to_string(ActionType type) noexcept;
std::string_view to_string(Direction d) noexcept;

// Exact canonical names only; alias handling lives in map_alias().
std::optional<ActionType> action_type_from_name(std::string_view name) noexcept;
std::optional<Direction> direction_from_name(std::string_view name) noexcept;

bool is_generation_action(ActionType type) noexcept;

// Throws Error(missing_field) when the per-type field requirements do not hold.
void check_action_fields(const Action& action);

// Always emits double-quoted JSON with only the fields relevant to the type.
nlohmann::ordered_json action_to_json(const Action& action);

// Accepts both the explorer encoding ("x"/"y") and the student encoding
// ("coordinates": [x, y]). Alias action types are normalized.
Action action_from_json(const nlohmann::json& j);

// One-line compact JSON, used in prompts, memory records and cycle keys.
std::string action_compact(const Action& action);

struct ParsedAction {
    std::string reason;
    Action action;
};

// Parses "Reason: ...\nAction: {...}" model output. Single-quoted payloads and
// Python literals (None/True/False) are accepted.
ParsedAction parse_action_text(std::string_view raw);

std::string render_action_text(std::string_view reason, const Action& action);

// Converts a JSON-like object literal that may use single quotes into strict
// JSON text. Exposed for the prompt parsers that share the same leniency.
std::string normalize_json_like(std::string_view text);

// Returns the first balanced {...} block in text, if any.
std::optional<std::string> extract_json_object(std::string_view text);

}  // namespace mobilegen
