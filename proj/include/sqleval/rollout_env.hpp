#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqleval/dataset.hpp"
#include "sqleval/executor.hpp"

namespace sqleval {

struct EnvConfig {
    int max_turns = 5;
    // Advisory per-turn output budget, forwarded to the generation client;
    // the environment itself does not count tokens.
    int per_turn_output_token_cap = 3076;
    std::chrono::milliseconds query_timeout{30000};
    int result_row_cap = 50;
    int result_char_cap = 5000;
};

struct Message {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const Message&) const = default;
};

enum class TerminalReason { FinalAnswer, TurnsExhausted, ClientError };

std::string_view to_string(TerminalReason reason);

struct Turn {
    std::string model_message;
    std::string env_response;
    double wall_time_s = 0.0;
};

struct RolloutTranscript {
    std::vector<Turn> turns;
    std::optional<std::string> final_sql;  // present iff terminal_reason == FinalAnswer
    TerminalReason terminal_reason = TerminalReason::TurnsExhausted;
};

// The contents of the last ```sql fenced block inside a <final_answer>
// envelope, if any. The envelope makes "no final SQL" (reward -1)
// detection unambiguous.
std::optional<std::string> extract_final_sql(std::string_view message);

// The last ```sql fenced block outside any <final_answer> envelope: the
// SQL tool invocation for this turn, if any.
std::optional<std::string> extract_tool_sql(std::string_view message);

// Render an execution outcome for the model: header row, up to row_cap
// rows, a "... (R rows total)" footer when truncated, hard-capped at
// char_cap characters. Errors are rendered as "error: ...".
std::string render_outcome(const ExecutionOutcome& outcome,
                           const std::vector<std::string>& column_names, int row_cap,
                           int char_cap);

// One multi-turn episode against a database. The initial message sequence
// is a universal system prompt, a universal one-shot tool demonstration,
// and the task message (schema + question + external knowledge).
class Episode {
  public:
    Episode(const Database& db, const TextToSqlInstance& instance, const SchemaPrompt& schema,
            EnvConfig config);

    const std::vector<Message>& initial_messages() const { return initial_messages_; }
    const EnvConfig& config() const { return config_; }
    bool terminal() const { return terminal_; }

    // Feed one model message. Returns the environment response while the
    // episode continues; nullopt once the episode is terminal (inspect
    // transcript() for the reason).
    std::optional<std::string> step(const std::string& model_message);

    // Mark the episode failed because the generation client gave up.
    void abort_client_error();

    const RolloutTranscript& transcript() const { return transcript_; }

  private:
    const Database& db_;
    EnvConfig config_;
    std::vector<Message> initial_messages_;
    RolloutTranscript transcript_;
    bool terminal_ = false;
};

// Prompt building blocks (exposed for tests and client wiring). The system
// prompt and demo are instance-independent; the system prompt embeds only
// the configured turn budget.
std::string universal_system_prompt(const EnvConfig& config);
const std::string& universal_one_shot_demo();
std::string task_message(const TextToSqlInstance& instance, const SchemaPrompt& schema);

}  // namespace sqleval
