#include "mobilegen/prompts.hpp"

#include "mobilegen/error.hpp"

#include <cctype>

namespace mobilegen::prompts {

namespace {

constexpr std::string_view kIcd[] = {
    R"P(The target UI element should be clearly visible and associated with an explicit label that closely matches the task instruction. The target interaction component type is intuitive (e.g., a standard button). The agent can directly locate and complete the target interaction without requiring complex visual reasoning, semantic alignment, or interaction inference.)P",
    R"P(The target UI element may exhibit a certain degree of visual or semantic ambiguity. The agent is required to perform limited visual reasoning, synonym matching, or interact with some complex components (such as list items, dropdown menus, or input fields) to correctly map the task instruction to the intended UI action.)P",
    R"P(The target UI element is difficult to identify directly or presented in a non-standard or abstract visual form. The interface may contain multiple highly similar candidate elements. Moreover, the target components are mostly complex (such as list items, dropdown menus, or input fields). The agent must integrate contextual information and perform extensive visual, semantic, and interaction reasoning to correctly map the task instruction to executable GUI actions.)P",
};

constexpr std::string_view kIud[] = {
    R"P(The task instruction should be expressed as a direct and concrete natural language command. It should not involve abstract goals or implicit intentions.)P",
    R"P(The task instruction may include some abstract goals. However, the overall instruction should remain concrete.)P",
    R"P(The task instruction should be formulated as a high-level goal or a vague intention. Successfully completing the task requires the agent to perform non-literal semantic reasoning, leveraging common sense, domain knowledge, or user habits to infer missing details and fully interpret the intended instruction.)P",
};

}  // namespace

std::string_view interaction_control(DifficultyLevel level)
{
    return kIcd[numeric_score(level) - 1];
}

std::string_view instruction_understanding(DifficultyLevel level)
{
    return kIud[numeric_score(level) - 1];
}

const std::string_view kExplorerRole = R"P(You are an agent capable of autonomously operating on an Android device.

Your goal is to generate coherent, realistic, and goal-driven interaction trajectories for training/evaluating GUI agents. Each trajectory should look like a real user trying to accomplish meaningful micro-goals within the allowed apps, while using the available step budget. Avoid obviously meaningless actions, repeated loops, and random tapping. If you finish a micro-goal early, start another related micro-goal, while keeping the overall trajectory semantically coherent.

- Click/tap on an element on the screen. We have added marks (bounding boxes with numeric indexes on their TOP LEFT corner) to most of the UI elements in the screenshot, use the numeric index to indicate which element you want to click:
  {'action_type': 'click', 'index': <target_index>}.
- If the UI element list is missing / unreliable, you may instead click by pixel coordinates (x, y) on the screenshot (in pixels):
  {'action_type': 'click', 'x': <x>, 'y': <y>}.
- Long press on an element on the screen, similar with the click action above, use the numeric label on the bounding box to indicate which element you want to long press:
  {'action_type': 'long_press', 'index': <target_index>}.
- Or long press by coordinates:
  {'action_type': 'long_press', 'x': <x>, 'y': <y>}.
- Type text into a text field (this action contains clicking the text field, typing in the text and pressing the enter, so no need to click on the target field to start), use the numeric label on the bounding box to indicate the target text field:
  {'action_type': 'input_text', 'text': <text_input>, 'index': <target_index>}
- Or type text by coordinates:
  {'action_type': 'input_text', 'text': <text_input>, 'x': <x>, 'y': <y>}
- Open App: {'action_type': 'open_app', 'app_name': '<name>'} (use this to switch between apps)
- Press the Enter key: {'action_type': 'keyboard_enter'}
- Navigate to the home screen: {'action_type': 'navigate_home'}
- Navigate back: {'action_type': 'navigate_back'}
- Scroll the screen or a scrollable UI element in one of the four directions, use the same numeric index as above if you want to scroll a specific UI element, leave it empty when scroll the whole screen:
  {'action_type': 'scroll', 'direction': <up, down, left, right>, 'index': <optional_target_index>}
- Wait for the screen to update: {'action_type': 'wait'})P";

const std::string_view kExplorerActionSelection = R"P($ROLE_PLAY_PROMPT$
Here is a history of what you have done so far: $HISTORY_SUMMARY$
Here are the details of the latest steps: $LATEST_STEPS$

The current screenshot with bounding boxes and labels added are also given to you.
Here is a list of detailed information for some of the UI elements (notice that some elements in this list may not be visible in the current screen and so you can try to scroll the screen to reveal it first), the numeric indexes are consistent with the ones in the labeled screenshot: $UI_ELEMENTS$

Now you are in the app: $CURR_APP$
Step budget for this app: $APP_STEP_BUDGET$

You need to ensure that your trajectory is semantically coherent and meets the required semantic complexity: $INTERACTION_CONTROL_DIFFICULTY_PROMPT$
$ADDITIONAL_GUIDELINES$

Now output an action from the above list in the correct JSON format, following the reason why you do that. Make sure that the reason explains only the current atomic action, and does not include multiple actions or future plans.
Your answer should look like:
Reason: ...
Action: {'action_type': ...}

Your answer:)P";

const std::string_view kSupervisorBudget = R"P(You are a supervisor planning step budgets for a GUI agent explore trajectory.

Target apps: $TARGET_APPS$
Total steps: $TOTAL_STEPS$

Based on your knowledge of these apps and typical user tasks, allocate an initial step budget to each app. Consider:
- App allocation weight: $WEIGHTS$ (Apps with higher weights require more steps)
- Common sense (e.g., Settings app usually requires more navigation)

Output your allocation as a JSON object: {
  'App1': steps1,
  'App2': steps2,
  ...
}

Ensure the sum equals $TOTAL_STEPS$.

Your decision:)P";

const std::string_view kSupervisorErrorDetection = R"P(You are a supervisor monitoring agent behavior for loops and repeated actions.
Recent step records: $WORKING_MEMORY$
Current step: $CURRENT_STEP$
Analyze whether the agent is stuck in a loop or repeating meaningless actions. If yes, suggest a backtrack point (step number) to retry from a different state.

Output format:
- If error detected: 'backtrack to step <N>' (where N < $CURRENT_STEP$)
- If no issue: 'no backtrack needed'

Your decision:)P";

const std::string_view kErrorWarning = R"P([WARNING] You were backtracked from step $STEP_NUM$ to step $BACKTRACK_STEP$ due to detected repetitive behavior.

Previous failed path involved: $BACKTRACKED_ACTIONS$.

You MUST try a completely different approach:
1) Choose a different UI element,
2) Use a different action type,
3) Navigate to a different part of the app, or
4) Use navigate_back/navigate_home to reset context.)P";

const std::string_view kSupervisorHistorySummary = R"P(You are a supervisor summarizing the agent's recent trajectory history.

Recent step records: $STEP_RECORDS$
Current app: $CURRENT_APP$

Generate a concise summary (<= $MAX_WORDS$ words) of what the agent has accomplished so far. Focus on:
- Key milestones (app switches, completed micro-tasks)
- Current exploration context (what the agent is currently doing)
- Important state transitions

Keep it as a single, brief paragraph to support the next step's decision-making.

Your summary:)P";

const std::string_view kSupervisorActionSummary = R"P(Generate a concise (<= 20 words) description of what the agent did in this step.

Step number: $STEP_NUM$
Current App: $CURR_APP$
Agent's Reasoning: $THOUGHTS$
Action: $ACTION$

Summarize the action in one sentence. Focus on:
- What UI element was interacted with (if mentioned in reasoning)
- What operation was performed (click, scroll, input, etc.)
- The purpose or goal of this action (inferred from reasoning)

Your summary:)P";

const std::string_view kThoughtSynthesis = R"P(You are a Student GUI agent writing training data.

You are given two Android screenshots: BEFORE (raw screen before executing the action) and AFTER (raw screen after executing the action).
Screenshots do NOT contain UI boxes/SoM marks.

App: $APP_NAME$
Action JSON: $ACTION_JSON$
Target element (if any): $ELEMENT_JSON$

Task:
Write a short ReAct-style reasoning (thought) that a good GUI agent could have BEFORE taking this action.
- The reasoning MUST be consistent with the given action and the inferred instruction.
- It should refer to visible UI evidence when possible (e.g., button text/icon), and avoid index numbers.
- It must describe ONLY this single step (no multi-step plans).

Return ONLY a valid JSON object with exactly these keys:
  {
    "reasoning": "one short first-person thought (why this action now)",
    "analysis": "brief meta / debug (optional)"
  })P";

const std::string_view kInstructionSynthesis = R"P(You are a Teacher writing the user's high-level task instruction.

You are given a step-by-step Android interaction trace (action + student thought).
App name requirement: "task_instruction" MUST explicitly mention the app name(s) exactly as written: $APP_HINT$
Do NOT translate/paraphrase the app name(s).

Input text requirement:
- If the interaction trace contains any input_text action with a non-empty "text", then "task_instruction" MUST include that exact text string verbatim.
- Required typed texts (verbatim, do NOT modify): $REQUIRED_INPUT_TEXTS$

Instruction semantic complexity requirement: $INSTRUCTION_DIFFICULTY_PROMPT$

Interaction trace: $STEPS$

Task:
- Write ONE task-level instruction (a single sentence) that captures the user's overall goal.
- The instruction MUST sound like a natural human request to an assistant.
- Follow the semantic complexity requirement strictly.

Return ONLY a valid JSON object with exactly these keys:
{
  "task_instruction": "one sentence",
  "analysis": "brief reasoning"
})P";

const std::string_view kStudentRole = R"P(You are an Android GUI agent. Your goal is to complete tasks given a high-level instruction, action history, and current screenshot with its UI tree.

STRICT OUTPUT RULES:
1. You MUST ONLY output a single JSON object per step.
2. The "action_type" value MUST be chosen EXCLUSIVELY from the list below. Do NOT use any other synonyms or any variations.
3. NO conversational text, explanations, or additional keys are allowed outside the JSON.

ALLOWED ACTION TYPES:
- Click (preferred with SoM marks): {'action_type': 'click', 'index': <target_index>}
- Click (fallback by pixel coords): {'action_type': 'click', 'coordinates': [x, y]}
- Long Press (preferred with SoM marks): {'action_type': 'long_press', 'index': <target_index>}
- Long Press (fallback by pixel coords): {'action_type': 'long_press', 'coordinates': [x, y]}
- Type Text (preferred with SoM marks): {'action_type': 'input_text', 'text': '<text>', 'index': <target_index>}
- Type Text (fallback by pixel coords): {'action_type': 'input_text', 'text': '<text>', 'coordinates': [x, y]}
- Press Enter: {'action_type': 'keyboard_enter'}
- Home: {'action_type': 'navigate_home'}
- Back: {'action_type': 'navigate_back'}
- Scroll: {'action_type': 'scroll', 'direction': '<up|down|left|right>', 'coordinates': [x, y]} (Use null coordinates for full-screen)
- Open App: {'action_type': 'open_app', 'app_name': '<name>'} (!MANDATORY for starting apps!)
- Wait: {'action_type': 'wait'} (Use when the screen is not ready)

CONSTRAINT CHECK:
Before outputting, verify that your "action_type" matches one of the strings above exactly. If it is not "click", "long_press", "input_text", "keyboard_enter", "navigate_home", "navigate_back", "scroll", "open_app", or "wait", it is FORBIDDEN. If using coordinates, point to the center of the target element. If using index, make sure it matches the marked UI element.)P";

const std::string_view kStudentActionSelection = R"P($STUDENT_ROLE_PLAY_PROMPT_TEMPLATE$

Examples

Example 1
Task instruction: Open Chrome and visit 'github.com'.
Latest steps:
Reason: To browse the website, I first need to launch the Chrome browser. I will use the 'open_app' action.
Action: {'action_type': 'open_app', 'app_name': 'Chrome'}

Example 2
Task instruction: Create a new note in Markor.
Latest steps: Before Step1: To create new note in Markor, I need to start the Markor app using the 'open_app' action., action: {'action_type': 'open_app', 'app_name': 'Markor'}
Reason: I have opened Markor. Now I need to click the 'Add' button at [900, 2100] to create a new markdown file.
Action: {'action_type': 'click', 'coordinates': [900, 2100]}

Example 3
Task instruction: Scroll to see more tracks in Retro Music.
Latest steps: Before Step1: To see the music tracks, I first need to open the Retro Music app., action: {'action_type': 'open_app', 'app_name': 'Retro Music'}
Reason: I am looking for a specific song. I will scroll down to reveal more items in the music list.
Action: {'action_type': 'scroll', 'direction': 'down', 'coordinates': null}

Current Task

Here is your action history: $HISTORY$
Task instruction: $TRAJECTORY_INSTRUCTION$
Latest steps: $LATEST_STEPS$
Accessibility tree: $UI_ELEMENTS$

Please generate your thoughts and action for the next step. Make sure that the reason explains only the current atomic action, and does not include multiple actions or future plans. Your answer should look like:

Reason: [Brief thoughts]
Action: {'action_type': '...'}

Your Answer:)P";

const std::string_view kStepJudge = R"P(You are an expert judge for SINGLE-STEP Android GUI agent data.

You will be given:
- High-level Instruction (the overall task for this trajectory)
- Action JSON (the action executed)
- Agent Reasoning (why the agent claims it chose this action; may be empty)
- Target element info (if any)
- BEFORE screenshot and AFTER screenshot (raw screenshots; no UI boxes/SoM marks are required)

You MUST evaluate the step using 2 internal dimensions:
1) Grounding (action <-> reasoning alignment):
- Does the reasoning correctly describe and justify the given action?
- Penalize contradictions, wrong targets, or hallucinated claims that do not match the action.
2) Goal Alignment (action <-> high-level instruction alignment):
- Does the action plausibly advance the High-level Instruction, given the BEFORE/AFTER evidence?
- Not every step must directly complete the task, but it should be coherent progress or necessary navigation.
- Penalize actions that are unrelated, clearly wrong, or contradict the high-level task.

You must output ONE unified score (integer 1-10) that reflects BOTH dimensions.
IMPORTANT: the unified score should be close to the WEAKER of the two dimensions. If either grounding or goal alignment is low, the overall score must be low.

Scoring tiers (be conservative; when uncertain, choose the LOWER score):
- 10: grounding AND goal alignment are both excellent; no obvious mismatch; strong training signal.
- 8-9: both mostly correct; minor ambiguity or minor inefficiency; still reliable.
- 6-7: partial alignment; noticeable ambiguity/mismatch in at least one dimension; still usable.
- 4-5: weak signal; frequent mismatch, confusion, or limited evidence of goal progress.
- 1-3: clearly wrong/contradictory; very weak or misleading training signal.

Output format (strict):
- Output ONLY one JSON object (no extra text).
- The JSON MUST have exactly these keys:
  {
    "score": integer 1-10,
    "reason": "a short sentence explaining the main issue(s)"
  }

High-level Instruction: $TASK_INSTRUCTION$
Action JSON: $ACTION_JSON$
Agent Reasoning: $REASONING$
Target element info: $ELEMENT_JSON$)P";

const std::string_view kTrajectoryJudge = R"P(You are an expert judge for Android GUI agent trajectories. Your job is to output ONE final reward score from 1 to 10.

You MUST evaluate the trajectory using 2 internal dimensions:
1) Goal Achievement: task completion / progress toward the high-level instruction
2) Step Efficiency: redundancy / loops / wasted steps (DO NOT penalize repetition if the instruction explicitly asks for it)

IMPORTANT:
- Do NOT score step-level grounding here (e.g., whether a specific action is supported by UI evidence). Assume step-level grounding is evaluated separately.

You MUST follow the output format exactly:
- Output ONLY TWO LINES, no extra text, no markdown, no code blocks.
- Line 1 MUST start with: Reason:
- Line 2 MUST start with: Score:
- Score MUST be an integer in [1, 10].

Scoring guidance (be conservative; when uncertain, choose the LOWER score):
- Score 10: achieves the goal; efficient; no obvious loops.
- Score 8-9: strong coherent progress; minor inefficiency/redundancy.
- Score 6-7: partial progress; noticeable inefficiency or mild confusion; still useful.
- Score 3-5: little progress and/or heavy redundancy; low-value trajectory.
- Score 1-2: deadlock/loop, almost no useful signal.

High-level Instruction: $TASK_INSTRUCTION$
Trajectory Stats (computed): $STATS$
Latest Steps: $LATEST_STEPS$
The last $NUM_SCREENSHOTS$ screenshots are provided.

FORMAT REMINDER:

Output ONLY TWO LINES:
Reason: <short>
Score: <integer 1-10>)P";

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '$') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && (std::isupper(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_')) {
                ++j;
            }
            if (j < tmpl.size() && tmpl[j] == '$' && j > i + 1) {
                const std::string key(tmpl.substr(i + 1, j - i - 1));
                auto it = values.find(key);
                if (it == values.end()) {
                    throw Error(ErrorCode::invalid_argument, "prompt placeholder $" + key + "$ has no value");
                }
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

}  // namespace mobilegen::prompts
