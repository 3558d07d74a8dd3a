#include "mobilegen/environment.hpp"

#include "mobilegen/error.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mobilegen {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kDefaultWidth = 1080;
constexpr int kDefaultHeight = 2400;
constexpr int kAutoLayoutRows = 10;

PixelRect auto_row(int position, int width)
{
    const double top = 240.0 + 200.0 * position;
    return PixelRect{40.0, top, static_cast<double>(width) - 40.0, top + 160.0};
}

PixelRect rect_from_json(const nlohmann::json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_number(); })) {
        throw Error(ErrorCode::graph_invalid, where + ": bbox must be [left, top, right, bottom]");
    }
    return PixelRect{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ojson rect_to_json(const PixelRect& r)
{
    auto num = [](double v) -> ojson {
        if (v == static_cast<double>(static_cast<std::int64_t>(v))) {
            return static_cast<std::int64_t>(v);
        }
        return v;
    };
    return ojson::array({num(r.left), num(r.top), num(r.right), num(r.bottom)});
}

std::string edge_name(const Transition& t)
{
    std::ostringstream os;
    os << t.from << " --" << to_string(t.action);
    if (t.element) {
        os << "#" << *t.element;
    }
    if (t.direction) {
        os << "(" << to_string(*t.direction) << ")";
    }
    os << "--> " << t.to;
    return os.str();
}

}  // namespace

const UiElement* Observation::element(int index) const
{
    if (index < 0 || index >= static_cast<int>(elements.size())) {
        return nullptr;
    }
    return &elements[static_cast<std::size_t>(index)];
}

const UiElement* Observation::element_at(Point p) const
{
    const UiElement* best = nullptr;
    double best_area = 0.0;
    for (const auto& e : elements) {
        if (!e.bbox.contains(p)) {
            continue;
        }
        const double area = (e.bbox.right - e.bbox.left) * (e.bbox.bottom - e.bbox.top);
        if (best == nullptr || area < best_area) {
            best = &e;
            best_area = area;
        }
    }
    return best;
}

nlohmann::ordered_json observation_to_json(const Observation& obs)
{
    ojson elements = ojson::array();
    for (const auto& e : obs.elements) {
        ojson je;
        je["index"] = e.index;
        je["type"] = e.type;
        je["label"] = e.label;
        je["bbox"] = rect_to_json(e.bbox);
        if (e.text) {
            je["text"] = *e.text;
        }
        elements.push_back(std::move(je));
    }
    ojson j;
    j["app"] = obs.app;
    j["screen_id"] = obs.screen_id;
    j["width"] = obs.width;
    j["height"] = obs.height;
    j["elements"] = std::move(elements);
    j["screenshot_ref"] = obs.screenshot_ref;
    j["som_ref"] = obs.som_ref;
    j["ui_tree_ref"] = obs.ui_tree_ref;
    return j;
}

Observation observation_from_json(const nlohmann::json& j)
{
    try {
        Observation obs;
        obs.app = j.at("app").get<std::string>();
        obs.screen_id = j.at("screen_id").get<std::string>();
        obs.width = j.at("width").get<int>();
        obs.height = j.at("height").get<int>();
        for (const auto& je : j.at("elements")) {
            UiElement e;
            e.index = je.at("index").get<int>();
            e.type = je.at("type").get<std::string>();
            e.label = je.at("label").get<std::string>();
            e.bbox = rect_from_json(je.at("bbox"), "element");
            if (auto it = je.find("text"); it != je.end() && !it->is_null()) {
                e.text = it->get<std::string>();
            }
            obs.elements.push_back(std::move(e));
        }
        obs.screenshot_ref = j.value("screenshot_ref", "");
        obs.som_ref = j.value("som_ref", "");
        obs.ui_tree_ref = j.value("ui_tree_ref", "");
        return obs;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::schema_violation, std::string("observation: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::schema_violation, e.what());
    }
}

ScreenGeometry geometry_for(const Observation& obs, const Action& gt)
{
    ScreenGeometry g;
    g.width = obs.width;
    g.height = obs.height;
    g.gt_point = Point{obs.width / 2.0, obs.height / 2.0};
    for (const auto& e : obs.elements) {
        g.elements[e.index] = e.bbox;
    }
    if (gt.has_index()) {
        if (const auto* e = obs.element(gt.index())) {
            g.gt_bbox = e->bbox;
            g.gt_point = e->bbox.center();
        }
    } else if (gt.has_point()) {
        const Point p = gt.point();
        g.gt_point = Point{std::clamp(p.x, 0.0, static_cast<double>(obs.width)),
                           std::clamp(p.y, 0.0, static_cast<double>(obs.height))};
        if (const auto* e = obs.element_at(g.gt_point)) {
            g.gt_bbox = e->bbox;
        }
    }
    return g;
}

const ScreenDef* AppGraph::screen(std::string_view id) const
{
    for (const auto& s : screens) {
        if (s.id == id) {
            return &s;
        }
    }
    return nullptr;
}

void validate_app_graph(const AppGraph& g)
{
    const std::string where = "app '" + g.app + "'";
    if (g.app.empty()) {
        throw Error(ErrorCode::graph_invalid, "app name is empty");
    }
    if (g.app == kLauncherApp) {
        throw Error(ErrorCode::graph_invalid, where + ": name is reserved for the launcher");
    }
    std::set<std::string> ids;
    for (const auto& s : g.screens) {
        if (!ids.insert(s.id).second) {
            throw Error(ErrorCode::graph_invalid, where + ": duplicate screen '" + s.id + "'");
        }
        for (std::size_t i = 0; i < s.elements.size(); ++i) {
            const auto& e = s.elements[i];
            if (e.index != static_cast<int>(i)) {
                throw Error(ErrorCode::graph_invalid, where + ": screen '" + s.id + "' has non-contiguous element indices");
            }
            const auto& b = e.bbox;
            if (b.left < 0 || b.top < 0 || b.right > kDefaultWidth || b.bottom > kDefaultHeight || b.left >= b.right ||
                b.top >= b.bottom) {
                throw Error(ErrorCode::graph_invalid,
                            where + ": element " + std::to_string(i) + " of screen '" + s.id + "' is off screen");
            }
        }
    }
    if (!ids.contains(g.home)) {
        throw Error(ErrorCode::graph_invalid, where + ": home screen '" + g.home + "' does not exist");
    }
    for (const auto& t : g.transitions) {
        const auto* from = g.screen(t.from);
        if (from == nullptr) {
            throw Error(ErrorCode::graph_invalid, where + ": transition " + edge_name(t) + " starts at a missing screen");
        }
        if (!ids.contains(t.to)) {
            throw Error(ErrorCode::graph_invalid, where + ": transition " + edge_name(t) + " targets missing screen '" +
                                                      t.to + "'");
        }
        if (t.element && (*t.element < 0 || *t.element >= static_cast<int>(from->elements.size()))) {
            throw Error(ErrorCode::graph_invalid, where + ": transition " + edge_name(t) + " names a missing element");
        }
        if (!is_generation_action(t.action) || t.action == ActionType::open_app ||
            t.action == ActionType::navigate_back || t.action == ActionType::navigate_home ||
            t.action == ActionType::wait) {
            throw Error(ErrorCode::graph_invalid,
                        where + ": transition " + edge_name(t) + " uses an action the simulator handles itself");
        }
        if ((t.action == ActionType::click || t.action == ActionType::long_press) && !t.element) {
            throw Error(ErrorCode::graph_invalid, where + ": transition " + edge_name(t) + " needs an element");
        }
    }
    std::set<std::string> reached{g.home};
    std::deque<std::string> queue{g.home};
    while (!queue.empty()) {
        const std::string cur = queue.front();
        queue.pop_front();
        for (const auto& t : g.transitions) {
            if (t.from == cur && reached.insert(t.to).second) {
                queue.push_back(t.to);
            }
        }
    }
    for (const auto& s : g.screens) {
        if (!reached.contains(s.id)) {
            throw Error(ErrorCode::graph_invalid, where + ": screen '" + s.id + "' is unreachable from home");
        }
    }
}

AppGraph load_app_graph(std::string_view definition)
{
    auto j = nlohmann::json::parse(definition.begin(), definition.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::graph_invalid, "app graph is not a JSON object");
    }
    AppGraph g;
    try {
        g.app = j.at("app").get<std::string>();
        g.home = j.at("home").get<std::string>();
        for (const auto& js : j.at("screens")) {
            ScreenDef s;
            s.id = js.at("id").get<std::string>();
            const auto& elements = js.at("elements");
            const bool auto_layout = std::none_of(elements.begin(), elements.end(),
                                                  [](const auto& e) { return e.contains("bbox"); });
            if (auto_layout && elements.size() > kAutoLayoutRows) {
                throw Error(ErrorCode::graph_invalid,
                            "screen '" + s.id + "' has too many elements for automatic layout; give bboxes");
            }
            int position = 0;
            for (const auto& je : elements) {
                UiElement e;
                e.index = position;
                e.type = je.value("type", "button");
                e.label = je.at("label").get<std::string>();
                e.bbox = auto_layout ? auto_row(position, kDefaultWidth)
                                     : rect_from_json(je.at("bbox"), "screen '" + s.id + "'");
                s.elements.push_back(std::move(e));
                ++position;
            }
            g.screens.push_back(std::move(s));
        }
        for (const auto& jt : j.value("transitions", nlohmann::json::array())) {
            Transition t;
            t.from = jt.at("from").get<std::string>();
            t.to = jt.at("to").get<std::string>();
            auto type = action_type_from_name(jt.at("action").get<std::string>());
            if (!type) {
                throw Error(ErrorCode::graph_invalid, "transition from '" + t.from + "' has unknown action");
            }
            t.action = *type;
            if (jt.contains("element")) {
                t.element = jt.at("element").get<int>();
            }
            if (jt.contains("direction")) {
                t.direction = direction_from_name(jt.at("direction").get<std::string>());
                if (!t.direction) {
                    throw Error(ErrorCode::graph_invalid, "transition from '" + t.from + "' has unknown direction");
                }
            }
            if (jt.contains("text_contains")) {
                t.text_contains = jt.at("text_contains").get<std::string>();
            }
            g.transitions.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::graph_invalid, std::string("malformed app graph: ") + e.what());
    }
    validate_app_graph(g);
    return g;
}

std::vector<AppGraph> load_app_graphs(const std::string& directory)
{
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(directory, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    if (ec) {
        throw Error(ErrorCode::io_error, "cannot list app directory " + directory + ": " + ec.message());
    }
    std::sort(files.begin(), files.end());
    std::vector<AppGraph> graphs;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            graphs.push_back(load_app_graph(ss.str()));
        } catch (const Error& e) {
            throw Error(ErrorCode::graph_invalid, f.filename().string() + ": " + e.what());
        }
    }
    return graphs;
}

SimulatedEnvironment::SimulatedEnvironment(std::vector<AppGraph> graphs, int width, int height)
    : graphs_(std::move(graphs)), width_(width), height_(height)
{
    std::set<std::string> names;
    for (const auto& g : graphs_) {
        validate_app_graph(g);
        if (!names.insert(canonicalize(g.app)).second) {
            throw Error(ErrorCode::graph_invalid, "app '" + g.app + "' is registered twice");
        }
    }
    reset();
}

std::vector<std::string> SimulatedEnvironment::apps() const
{
    std::vector<std::string> out;
    for (const auto& g : graphs_) {
        out.push_back(g.app);
    }
    return out;
}

const AppGraph* SimulatedEnvironment::graph(std::string_view app) const
{
    const std::string key = canonicalize(app);
    for (const auto& g : graphs_) {
        if (canonicalize(g.app) == key) {
            return &g;
        }
    }
    return nullptr;
}

std::vector<UiElement> SimulatedEnvironment::layout_launcher() const
{
    std::vector<UiElement> icons;
    const double cell = width_ / 4.0;
    for (std::size_t i = 0; i < graphs_.size(); ++i) {
        const double col = static_cast<double>(i % 4);
        const double row = static_cast<double>(i / 4);
        UiElement e;
        e.index = static_cast<int>(i);
        e.type = "icon";
        e.label = graphs_[i].app;
        e.bbox = PixelRect{col * cell + 20.0, 300.0 + row * 280.0, (col + 1.0) * cell - 20.0, 300.0 + row * 280.0 + 240.0};
        icons.push_back(std::move(e));
    }
    return icons;
}

std::string SimulatedEnvironment::form_key(const Frame& f, int element)
{
    return f.app + "/" + f.screen + "/" + std::to_string(element);
}

Observation SimulatedEnvironment::reset()
{
    ++epoch_;
    snapshots_.clear();
    state_ = State{};
    state_.stack.push_back(Frame{std::string(kLauncherApp), "home"});
    return observe();
}

Observation SimulatedEnvironment::observe() const
{
    const Frame& top = state_.stack.back();
    Observation obs;
    obs.app = top.app;
    obs.screen_id = top.screen;
    obs.width = width_;
    obs.height = height_;
    if (top.app == kLauncherApp) {
        obs.elements = layout_launcher();
        return obs;
    }
    const auto* g = graph(top.app);
    const auto* s = g->screen(top.screen);
    obs.elements = s->elements;
    for (auto& e : obs.elements) {
        if (auto it = state_.form_text.find(form_key(top, e.index)); it != state_.form_text.end()) {
            e.text = it->second;
        }
    }
    return obs;
}

std::optional<int> SimulatedEnvironment::resolve_target(const Observation& obs, const Action& action) const
{
    if (action.has_index()) {
        if (obs.element(action.index()) != nullptr) {
            return action.index();
        }
        return std::nullopt;
    }
    if (action.has_point()) {
        if (const auto* e = obs.element_at(action.point())) {
            return e->index;
        }
    }
    return std::nullopt;
}

const Transition* SimulatedEnvironment::find_transition(const AppGraph& g, const std::string& screen,
                                                        const Action& action, std::optional<int> element,
                                                        const std::string& typed) const
{
    for (const auto& t : g.transitions) {
        if (t.from != screen || t.action != action.type) {
            continue;
        }
        if (t.element && t.element != element) {
            continue;
        }
        if (t.direction && t.direction != action.direction) {
            continue;
        }
        if (t.text_contains && canonicalize(typed).find(canonicalize(*t.text_contains)) == std::string::npos) {
            continue;
        }
        return &t;
    }
    return nullptr;
}

StepResult SimulatedEnvironment::step(const Action& action)
{
    if (!is_generation_action(action.type)) {
        throw Error(ErrorCode::environment_fault,
                    std::string(to_string(action.type)) + " is not part of the generation action space");
    }
    const State before = state_;
    const Observation current = observe();
    Frame& top = state_.stack.back();

    switch (action.type) {
    case ActionType::wait:
        return StepResult{current, false};
    case ActionType::navigate_back:
        if (state_.stack.size() > 1) {
            state_.stack.pop_back();
        }
        break;
    case ActionType::navigate_home:
        state_.stack.assign(1, Frame{std::string(kLauncherApp), "home"});
        break;
    case ActionType::open_app: {
        const auto* g = graph(action.app_name.value_or(""));
        if (g == nullptr) {
            throw Error(ErrorCode::unknown_app, "'" + action.app_name.value_or("") + "' is not installed");
        }
        state_.stack.assign(1, Frame{std::string(kLauncherApp), "home"});
        state_.stack.push_back(Frame{g->app, g->home});
        break;
    }
    default: {
        const auto element = resolve_target(current, action);
        if (top.app == kLauncherApp) {
            if (element && (action.type == ActionType::click || action.type == ActionType::long_press)) {
                const auto& g = graphs_[static_cast<std::size_t>(*element)];
                state_.stack.push_back(Frame{g.app, g.home});
            }
            break;
        }
        std::string typed;
        if (action.type == ActionType::input_text) {
            typed = action.text.value_or("");
            if (element) {
                state_.form_text[form_key(top, *element)] = typed;
            }
        }
        const auto* g = graph(top.app);
        if (const auto* t = find_transition(*g, top.screen, action, element, typed)) {
            if (t->to != top.screen) {
                state_.stack.push_back(Frame{top.app, t->to});
            }
        }
        break;
    }
    }
    return StepResult{observe(), state_ == before};
}

SnapshotToken SimulatedEnvironment::snapshot()
{
    snapshots_.push_back(state_);
    return SnapshotToken{epoch_, snapshots_.size() - 1};
}

Observation SimulatedEnvironment::restore(const SnapshotToken& token)
{
    if (token.epoch != epoch_ || token.id >= snapshots_.size()) {
        throw Error(ErrorCode::stale_token, "snapshot token predates the last reset");
    }
    state_ = snapshots_[token.id];
    return observe();
}

}  // namespace mobilegen
