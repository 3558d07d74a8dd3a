#pragma once

#include "mobilegen/environment.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace test_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("mobilegen-" + tag + "-" + std::to_string(rd()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// home --click Next--> second; "Stay" has no edge; a text field leads to
// "typed" when the text contains "go".
inline const char* kTinyApp = R"({
  "app": "Tiny",
  "home": "home",
  "screens": [
    {"id": "home", "elements": [{"type": "button", "label": "Next"}, {"type": "button", "label": "Stay"},
                                {"type": "input", "label": "Field"}]},
    {"id": "second", "elements": [{"type": "button", "label": "Back home"}]},
    {"id": "typed", "elements": [{"type": "text", "label": "Done"}]}
  ],
  "transitions": [
    {"from": "home", "action": "click", "element": 0, "to": "second"},
    {"from": "home", "action": "input_text", "element": 2, "text_contains": "go", "to": "typed"},
    {"from": "second", "action": "click", "element": 0, "to": "home"}
  ]
})";

inline mobilegen::AppGraph simple_app(const std::string& name)
{
    std::string def = kTinyApp;
    def.replace(def.find("Tiny"), 4, name);
    return mobilegen::load_app_graph(def);
}

}  // namespace test_support
