#include "mobilegen/action.hpp"

#include "mobilegen/error.hpp"
#include "mobilegen/matching.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace mobilegen {

namespace {

constexpr std::string_view kTypeNames[] = {
    "click",         "long_press",    "scroll",   "input_text", "navigate_home", "navigate_back",
    "open_app",      "wait",          "keyboard_enter", "terminate", "answer",  "status",
};

constexpr std::string_view kDirectionNames[] = {"up", "down", "left", "right"};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool starts_with_ci(std::string_view s, std::string_view prefix)
{
    if (s.size() < prefix.size()) {
        return false;
    }
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

nlohmann::ordered_json number_json(double v)
{
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) {
        return static_cast<std::int64_t>(v);
    }
    return v;
}

double as_number(const nlohmann::json& j, std::string_view field)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        try {
            std::size_t used = 0;
            const std::string s = j.get<std::string>();
            double v = std::stod(s, &used);
            if (used == s.size()) {
                return v;
            }
        } catch (const std::exception&) {
        }
    }
    throw Error(ErrorCode::schema_violation, "field '" + std::string(field) + "' is not numeric");
}

}  // namespace

std::string_view to_string(ActionType type) noexcept
{
    return kTypeNames[static_cast<int>(type)];
}

std::string_view to_string(Direction d) noexcept
{
    return kDirectionNames[static_cast<int>(d)];
}

std::optional<ActionType> action_type_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < std::size(kTypeNames); ++i) {
        if (kTypeNames[i] == name) {
            return static_cast<ActionType>(i);
        }
    }
    return std::nullopt;
}

std::optional<Direction> direction_from_name(std::string_view name) noexcept
{
    std::string lower;
    for (char c : trim(name)) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (std::size_t i = 0; i < std::size(kDirectionNames); ++i) {
        if (kDirectionNames[i] == lower) {
            return static_cast<Direction>(i);
        }
    }
    return std::nullopt;
}

bool is_generation_action(ActionType type) noexcept
{
    return static_cast<int>(type) <= static_cast<int>(ActionType::keyboard_enter);
}

Action Action::click(Target t)
{
    Action a;
    a.type = ActionType::click;
    a.target = t;
    return a;
}

Action Action::long_press(Target t)
{
    Action a;
    a.type = ActionType::long_press;
    a.target = t;
    return a;
}

Action Action::scroll(Direction d, Target t)
{
    Action a;
    a.type = ActionType::scroll;
    a.direction = d;
    a.target = t;
    return a;
}

Action Action::input_text(std::string text, Target t)
{
    Action a;
    a.type = ActionType::input_text;
    a.text = std::move(text);
    a.target = t;
    return a;
}

Action Action::open_app(std::string name)
{
    Action a;
    a.type = ActionType::open_app;
    a.app_name = std::move(name);
    return a;
}

Action Action::simple(ActionType type)
{
    Action a;
    a.type = type;
    return a;
}

void check_action_fields(const Action& a)
{
    const std::string type{to_string(a.type)};
    switch (a.type) {
    case ActionType::click:
    case ActionType::long_press:
        if (std::holds_alternative<std::monostate>(a.target)) {
            throw Error(ErrorCode::missing_field, type + " requires an index or coordinates");
        }
        break;
    case ActionType::input_text:
        if (!a.text || a.text->empty()) {
            throw Error(ErrorCode::missing_field, "input_text requires non-empty text");
        }
        break;
    case ActionType::scroll:
        if (!a.direction) {
            throw Error(ErrorCode::missing_field, "scroll requires a direction");
        }
        break;
    case ActionType::open_app:
        if (!a.app_name || a.app_name->empty()) {
            throw Error(ErrorCode::missing_field, "open_app requires a non-empty app_name");
        }
        break;
    default:
        break;
    }
    if (a.has_index() && a.index() < 0) {
        throw Error(ErrorCode::schema_violation, "element index must be non-negative");
    }
}

nlohmann::ordered_json action_to_json(const Action& a)
{
    nlohmann::ordered_json j;
    j["action_type"] = std::string(to_string(a.type));
    if (a.text) {
        j["text"] = *a.text;
    }
    if (a.direction) {
        j["direction"] = std::string(to_string(*a.direction));
    }
    if (a.app_name) {
        j["app_name"] = *a.app_name;
    }
    if (a.has_index()) {
        j["index"] = a.index();
    } else if (a.has_point()) {
        j["x"] = number_json(a.point().x);
        j["y"] = number_json(a.point().y);
    }
    return j;
}

Action action_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::schema_violation, "action payload is not an object");
    }
    auto type_it = j.find("action_type");
    if (type_it == j.end() || type_it->is_null()) {
        throw Error(ErrorCode::missing_field, "action_type is absent");
    }
    if (!type_it->is_string()) {
        throw Error(ErrorCode::unknown_action_type, "action_type is not a string");
    }

    Action a;
    a.type = map_alias(type_it->get<std::string>());

    auto present = [&](const char* key) {
        auto it = j.find(key);
        return it != j.end() && !it->is_null();
    };

    const bool has_index = present("index");
    const bool has_xy = present("x") || present("y");
    const bool has_coords = present("coordinates");
    if (static_cast<int>(has_index) + static_cast<int>(has_xy || has_coords) > 1) {
        throw Error(ErrorCode::schema_violation, "action carries both index and coordinates");
    }
    if (has_index) {
        const auto& idx = j.at("index");
        double v = as_number(idx, "index");
        if (v < 0 || v != std::floor(v)) {
            throw Error(ErrorCode::schema_violation, "index must be a non-negative integer");
        }
        a.target = ElementIndex{static_cast<int>(v)};
    } else if (has_coords) {
        const auto& c = j.at("coordinates");
        if (!c.is_array() || c.size() != 2) {
            throw Error(ErrorCode::schema_violation, "coordinates must be [x, y]");
        }
        a.target = Point{as_number(c[0], "coordinates"), as_number(c[1], "coordinates")};
    } else if (has_xy) {
        if (!present("x") || !present("y")) {
            throw Error(ErrorCode::missing_field, "coordinate target needs both x and y");
        }
        a.target = Point{as_number(j.at("x"), "x"), as_number(j.at("y"), "y")};
    }

    if (present("text")) {
        const auto& t = j.at("text");
        a.text = t.is_string() ? t.get<std::string>() : t.dump();
    }
    if (present("direction")) {
        const auto& d = j.at("direction");
        auto dir = d.is_string() ? direction_from_name(d.get<std::string>()) : std::nullopt;
        if (!dir) {
            throw Error(ErrorCode::schema_violation, "unknown scroll direction " + d.dump());
        }
        a.direction = dir;
    }
    if (present("app_name")) {
        const auto& n = j.at("app_name");
        if (!n.is_string()) {
            throw Error(ErrorCode::schema_violation, "app_name is not a string");
        }
        a.app_name = n.get<std::string>();
    }

    // Fields that do not belong to the type are dropped rather than rejected.
    if (a.type != ActionType::input_text && a.type != ActionType::answer && a.type != ActionType::status) {
        a.text.reset();
    }
    if (a.type != ActionType::scroll) {
        a.direction.reset();
    }
    if (a.type != ActionType::open_app) {
        a.app_name.reset();
    }
    switch (a.type) {
    case ActionType::click:
    case ActionType::long_press:
    case ActionType::scroll:
    case ActionType::input_text:
        break;
    default:
        a.target = std::monostate{};
    }

    check_action_fields(a);
    return a;
}

std::string action_compact(const Action& action)
{
    return action_to_json(action).dump();
}

std::string normalize_json_like(std::string_view text)
{
    std::string out;
    out.reserve(text.size() + 8);
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (c == '"' || c == '\'') {
            const char quote = c;
            out.push_back('"');
            ++i;
            while (i < n) {
                const char ch = text[i];
                if (ch == '\\' && i + 1 < n) {
                    const char nx = text[i + 1];
                    if (nx == '\'') {
                        out.push_back('\'');
                    } else {
                        out.push_back(ch);
                        out.push_back(nx);
                    }
                    i += 2;
                    continue;
                }
                if (ch == quote) {
                    ++i;
                    break;
                }
                if (ch == '"') {
                    out += "\\\"";
                } else if (ch == '\n') {
                    out += "\\n";
                } else if (ch == '\r') {
                    out += "\\r";
                } else if (ch == '\t') {
                    out += "\\t";
                } else {
                    out.push_back(ch);
                }
                ++i;
            }
            out.push_back('"');
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                ++j;
            }
            const std::string_view word = text.substr(i, j - i);
            if (word == "None") {
                out += "null";
            } else if (word == "True") {
                out += "true";
            } else if (word == "False") {
                out += "false";
            } else {
                out += word;
            }
            i = j;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::optional<std::string> extract_json_object(std::string_view text)
{
    const std::size_t start = text.find('{');
    if (start == std::string_view::npos) {
        return std::nullopt;
    }
    int depth = 0;
    char quote = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (quote != 0) {
            if (c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) {
                return std::string(text.substr(start, i - start + 1));
            }
        }
    }
    return std::nullopt;
}

ParsedAction parse_action_text(std::string_view raw)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = raw.size();
        }
        lines.push_back(raw.substr(pos, nl - pos));
        pos = nl + 1;
    }

    std::optional<std::size_t> reason_line;
    std::optional<std::size_t> action_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (!reason_line && starts_with_ci(line, "Reason:")) {
            reason_line = i;
        } else if (reason_line && starts_with_ci(line, "Action:")) {
            action_line = i;
            break;
        }
    }
    if (!reason_line) {
        throw Error(ErrorCode::malformed_action_text, "no 'Reason:' line");
    }
    if (!action_line) {
        throw Error(ErrorCode::malformed_action_text, "no 'Action:' line after the reason");
    }

    std::string reason{trim(trim(lines[*reason_line]).substr(7))};
    for (std::size_t i = *reason_line + 1; i < *action_line; ++i) {
        const auto extra = trim(lines[i]);
        if (!extra.empty()) {
            reason += (reason.empty() ? "" : " ");
            reason += extra;
        }
    }

    std::string payload{trim(lines[*action_line]).substr(7)};
    for (std::size_t i = *action_line + 1; i < lines.size(); ++i) {
        payload += '\n';
        payload += lines[i];
    }
    auto object = extract_json_object(payload);
    if (!object) {
        throw Error(ErrorCode::malformed_action_text, "action payload has no JSON object");
    }
    nlohmann::json j = nlohmann::json::parse(normalize_json_like(*object), nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::malformed_action_text, "action payload is not valid JSON: " + *object);
    }
    return ParsedAction{std::move(reason), action_from_json(j)};
}

std::string render_action_text(std::string_view reason, const Action& action)
{
    std::ostringstream os;
    os << "Reason: " << reason << "\nAction: " << action_compact(action);
    return os.str();
}

}  // namespace mobilegen
