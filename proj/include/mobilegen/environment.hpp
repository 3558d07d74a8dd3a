#pragma once

#include "mobilegen/action.hpp"
#include "mobilegen/matching.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobilegen {

struct UiElement {
    int index = 0;
    std::string type;  // button, input, list, text, icon, ...
    std::string label;
    PixelRect bbox;
    std::optional<std::string> text;  // current content of input fields

    friend bool operator==(const UiElement&, const UiElement&) = default;
};

struct Observation {
    std::string app;
    std::string screen_id;
    int width = 1080;
    int height = 2400;
    std::vector<UiElement> elements;
    std::string screenshot_ref;
    std::string som_ref;
    std::string ui_tree_ref;

    friend bool operator==(const Observation&, const Observation&) = default;

    const UiElement* element(int index) const;
    // Smallest element whose bbox contains p.
    const UiElement* element_at(Point p) const;
};

nlohmann::ordered_json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

// Screen geometry for matching against `gt` on this observation: index targets
// use the element bbox and centre, coordinate targets the smallest enclosing element.
ScreenGeometry geometry_for(const Observation& obs, const Action& gt);

struct ScreenDef {
    std::string id;
    std::vector<UiElement> elements;  // indices are assigned by position
};

struct Transition {
    std::string from;
    ActionType action = ActionType::click;
    std::optional<int> element;
    std::optional<Direction> direction;
    std::optional<std::string> text_contains;  // input_text only, canonicalized comparison
    std::string to;
};

struct AppGraph {
    std::string app;
    std::string home;
    std::vector<ScreenDef> screens;
    std::vector<Transition> transitions;

    const ScreenDef* screen(std::string_view id) const;
};

// Throws GraphInvalid naming the offending screen or transition.
AppGraph load_app_graph(std::string_view definition);
void validate_app_graph(const AppGraph& graph);

struct StepResult {
    Observation observation;
    bool no_effect = false;
};

struct SnapshotToken {
    std::uint64_t epoch = 0;
    std::uint64_t id = 0;
};

// Interface shared by the simulator and any device backend.
class Environment {
public:
    virtual ~Environment() = default;

    virtual Observation reset() = 0;
    virtual Observation observe() const = 0;
    virtual StepResult step(const Action& action) = 0;
    virtual SnapshotToken snapshot() = 0;
    virtual Observation restore(const SnapshotToken& token) = 0;
    virtual std::vector<std::string> apps() const = 0;
};

inline constexpr std::string_view kLauncherApp = "Launcher";

// Deterministic simulator driven by app graphs. The launcher screen lists one
// icon per registered app. Coordinate actions are resolved to the smallest
// element containing the point.
class SimulatedEnvironment : public Environment {
public:
    explicit SimulatedEnvironment(std::vector<AppGraph> graphs, int width = 1080, int height = 2400);

    Observation reset() override;
    Observation observe() const override;
    StepResult step(const Action& action) override;
    SnapshotToken snapshot() override;
    Observation restore(const SnapshotToken& token) override;
    std::vector<std::string> apps() const override;

private:
    struct Frame {
        std::string app;
        std::string screen;
        friend bool operator==(const Frame&, const Frame&) = default;
    };
    struct State {
        std::vector<Frame> stack;
        // (app/screen/element) -> typed text
        std::map<std::string, std::string> form_text;
        friend bool operator==(const State&, const State&) = default;
    };

    const AppGraph* graph(std::string_view app) const;
    std::optional<int> resolve_target(const Observation& obs, const Action& action) const;
    const Transition* find_transition(const AppGraph& g, const std::string& screen, const Action& action,
                                      std::optional<int> element, const std::string& typed) const;
    static std::string form_key(const Frame& f, int element);
    std::vector<UiElement> layout_launcher() const;

    std::vector<AppGraph> graphs_;
    int width_;
    int height_;
    State state_;
    std::uint64_t epoch_ = 0;
    std::vector<State> snapshots_;
};

// Loads every apps/*.json in a directory (sorted by file name).
std::vector<AppGraph> load_app_graphs(const std::string& directory);

}  // namespace mobilegen
