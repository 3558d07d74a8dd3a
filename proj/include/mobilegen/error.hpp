#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mobilegen {

enum class ErrorCode {
    malformed_action_text,
    unknown_action_type,
    missing_field,
    schema_violation,
    geometry_missing,
    no_correct_steps,
    empty_support,
    degenerate_anchors,
    empty_app_set,
    insufficient_apps,
    infeasible_bot,
    model_unavailable,
    script_exhausted,
    graph_invalid,
    unknown_app,
    stale_token,
    environment_fault,
    budget_infeasible,
    invalid_json,
    constraint_violated,
    invalid_judge_output,
    empty_dataset,
    invalid_config,
    invalid_argument,
    io_error,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Single exception type for every domain failure; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mobilegen
