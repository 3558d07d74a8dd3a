#pragma once

#include "mobilegen/environment.hpp"

#include <string>

namespace mobilegen {

// Flat placeholder screenshots: element boxes drawn at 1/4 scale. The SoM
// variant adds an outline and the numeric index at each box's top-left corner.
std::string render_screenshot_png(const Observation& obs);
std::string render_som_png(const Observation& obs);

}  // namespace mobilegen
