#pragma once

#include "mobilegen/model_client.hpp"

#include <memory>
#include <string>

namespace mobilegen {

// Offline stand-in for every model role (explorer, supervisor, synthesizer,
// judge, student). Each answer is a pure function of the request, so results
// do not depend on call order or concurrency.
std::string scenario_answer(const ChatRequest& request);

std::unique_ptr<MockClient> make_scenario_client();

}  // namespace mobilegen
