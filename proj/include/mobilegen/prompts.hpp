#pragma once

#include "mobilegen/trajectory.hpp"

#include <map>
#include <string>
#include <string_view>

namespace mobilegen::prompts {

// Difficulty texts injected into the explorer (ICD) and synthesizer (IUD) prompts.
std::string_view interaction_control(DifficultyLevel level);
std::string_view instruction_understanding(DifficultyLevel level);

extern const std::string_view kExplorerRole;
extern const std::string_view kExplorerActionSelection;
extern const std::string_view kSupervisorBudget;
extern const std::string_view kSupervisorErrorDetection;
extern const std::string_view kErrorWarning;
extern const std::string_view kSupervisorHistorySummary;
extern const std::string_view kSupervisorActionSummary;
extern const std::string_view kThoughtSynthesis;
extern const std::string_view kInstructionSynthesis;
extern const std::string_view kStudentRole;
extern const std::string_view kStudentActionSelection;
extern const std::string_view kStepJudge;
extern const std::string_view kTrajectoryJudge;

// Replaces every $NAME$ placeholder. Throws InvalidArgument for a placeholder
// without a value; values are inserted verbatim and never re-scanned.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace mobilegen::prompts
