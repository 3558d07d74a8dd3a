#include "mobilegen/error.hpp"

namespace mobilegen {

std::string_view error_code_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::malformed_action_text: return "MalformedActionText";
    case ErrorCode::unknown_action_type: return "UnknownActionType";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::schema_violation: return "SchemaViolation";
    case ErrorCode::geometry_missing: return "GeometryMissing";
    case ErrorCode::no_correct_steps: return "NoCorrectSteps";
    case ErrorCode::empty_support: return "EmptySupport";
    case ErrorCode::degenerate_anchors: return "DegenerateAnchors";
    case ErrorCode::empty_app_set: return "EmptyAppSet";
    case ErrorCode::insufficient_apps: return "InsufficientApps";
    case ErrorCode::infeasible_bot: return "InfeasibleBoT";
    case ErrorCode::model_unavailable: return "ModelUnavailable";
    case ErrorCode::script_exhausted: return "ScriptExhausted";
    case ErrorCode::graph_invalid: return "GraphInvalid";
    case ErrorCode::unknown_app: return "UnknownApp";
    case ErrorCode::stale_token: return "StaleToken";
    case ErrorCode::environment_fault: return "EnvironmentFault";
    case ErrorCode::budget_infeasible: return "BudgetInfeasible";
    case ErrorCode::invalid_json: return "InvalidJson";
    case ErrorCode::constraint_violated: return "ConstraintViolated";
    case ErrorCode::invalid_judge_output: return "InvalidJudgeOutput";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

}  // namespace mobilegen
