#include "sqleval/rollout_env.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace sqleval {

std::string_view to_string(TerminalReason reason) {
    switch (reason) {
        case TerminalReason::FinalAnswer: return "final_answer";
        case TerminalReason::TurnsExhausted: return "turns_exhausted";
        case TerminalReason::ClientError: return "client_error";
    }
    return "unknown";
}

namespace {

constexpr std::string_view kAnswerOpen = "<final_answer>";
constexpr std::string_view kAnswerClose = "</final_answer>";
constexpr std::string_view kFenceOpen = "```sql";
constexpr std::string_view kFenceClose = "```";

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

// Last ```sql block within [begin, end). `inside_answer` selects whether
// blocks inside or outside <final_answer> regions are eligible.
std::optional<std::string> last_sql_block(std::string_view message, bool inside_answer) {
    std::optional<std::string> found;
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = message.find(kFenceOpen, pos);
        if (open == std::string_view::npos) break;
        const std::size_t body = open + kFenceOpen.size();
        const std::size_t close = message.find(kFenceClose, body);
        if (close == std::string_view::npos) break;

        // Determine whether this block sits inside a final-answer envelope:
        // an opening marker before the block without a closing marker in
        // between.
        const std::size_t marker_open = message.rfind(kAnswerOpen, open);
        bool in_answer = false;
        if (marker_open != std::string_view::npos) {
            const std::size_t marker_close = message.find(kAnswerClose, marker_open);
            in_answer = marker_close == std::string_view::npos || marker_close > open;
        }
        if (in_answer == inside_answer) {
            found = trim(message.substr(body, close - body));
        }
        pos = close + kFenceClose.size();
    }
    return found;
}

}  // namespace

std::optional<std::string> extract_final_sql(std::string_view message) {
    auto sql = last_sql_block(message, /*inside_answer=*/true);
    if (sql && sql->empty()) return std::nullopt;
    return sql;
}

std::optional<std::string> extract_tool_sql(std::string_view message) {
    auto sql = last_sql_block(message, /*inside_answer=*/false);
    if (sql && sql->empty()) return std::nullopt;
    return sql;
}

std::string render_outcome(const ExecutionOutcome& outcome,
                           const std::vector<std::string>& column_names, int row_cap,
                           int char_cap) {
    std::string rendered;
    if (!outcome.ok()) {
        rendered = "error: " + outcome.message;
    } else {
        const CanonicalTable& table = *outcome.table;
        std::ostringstream out;
        out << "ok: " << table.rows.size() << " row(s), " << table.n_cols << " column(s)\n";
        std::string header;
        for (std::size_t c = 0; c < table.n_cols; ++c) {
            if (c > 0) header.push_back('|');
            header += c < column_names.size() ? column_names[c] : "col" + std::to_string(c);
        }
        out << header << "\n";
        const std::size_t shown =
            std::min(table.rows.size(), static_cast<std::size_t>(row_cap));
        for (std::size_t r = 0; r < shown; ++r) out << row_to_string(table.rows[r]) << "\n";
        if (shown < table.rows.size()) {
            out << "... (" << table.rows.size() << " rows total)\n";
        }
        rendered = out.str();
        if (!rendered.empty() && rendered.back() == '\n') rendered.pop_back();
    }
    if (rendered.size() > static_cast<std::size_t>(char_cap)) {
        rendered.resize(static_cast<std::size_t>(char_cap));
    }
    return rendered;
}

std::string universal_system_prompt(const EnvConfig& config) {
    std::ostringstream out;
    out << "You are a careful SQL analyst answering questions over a SQLite database.\n"
        << "You may explore the database with the SQL tool: write one query inside a\n"
        << "```sql fenced block and the next message will contain its result. You have\n"
        << "at most " << config.max_turns << " turns; the tool reports how many you have used.\n"
        << "When you are confident, reply with your final query wrapped as\n"
        << kAnswerOpen << "\n```sql\nSELECT ...\n```\n" << kAnswerClose << "\n"
        << "The final answer must be a single SQLite query that answers the question.";
    return out.str();
}

const std::string& universal_one_shot_demo() {
    static const std::string demo = []() {
        std::ostringstream out;
        out << "Example session.\n"
            << "Question: How many rows does the table pets have?\n"
            << "Assistant:\n```sql\nSELECT COUNT(*) FROM pets;\n```\n"
            << "Tool:\nok: 1 row(s), 1 column(s)\nCOUNT(*)\n3\nturn 1 of 5 used\n"
            << "Assistant:\n" << kAnswerOpen << "\n```sql\nSELECT COUNT(*) FROM pets;\n```\n"
            << kAnswerClose;
        return out.str();
    }();
    return demo;
}

std::string task_message(const TextToSqlInstance& instance, const SchemaPrompt& schema) {
    std::ostringstream out;
    out << "Database schema:\n" << schema.text << "\nQuestion: " << instance.question << "\n";
    if (!instance.external_knowledge.empty()) {
        out << "External knowledge: " << instance.external_knowledge << "\n";
    }
    out << "Answer with a single SQLite query.";
    return out.str();
}

Episode::Episode(const Database& db, const TextToSqlInstance& instance,
                 const SchemaPrompt& schema, EnvConfig config)
    : db_(db), config_(config) {
    initial_messages_.push_back({"system", universal_system_prompt(config_)});
    initial_messages_.push_back({"system", universal_one_shot_demo()});
    initial_messages_.push_back({"user", task_message(instance, schema)});
}

std::optional<std::string> Episode::step(const std::string& model_message) {
    if (terminal_) return std::nullopt;

    if (auto final_sql = extract_final_sql(model_message)) {
        transcript_.turns.push_back({model_message, "", 0.0});
        transcript_.final_sql = std::move(final_sql);
        transcript_.terminal_reason = TerminalReason::FinalAnswer;
        terminal_ = true;
        return std::nullopt;
    }

    const int turn_number = static_cast<int>(transcript_.turns.size()) + 1;
    std::string response;
    double wall = 0.0;
    if (auto tool_sql = extract_tool_sql(model_message)) {
        std::vector<std::string> names;
        const auto outcome = execute(db_, *tool_sql, config_.query_timeout, &names);
        wall = outcome.wall_time.count();
        response = render_outcome(outcome, names, config_.result_row_cap,
                                  config_.result_char_cap);
    } else {
        response =
            "No SQL tool call or final answer found. Write a query in a ```sql block, "
            "or wrap your final query in " +
            std::string(kAnswerOpen) + " tags.";
    }
    response += "\nturn " + std::to_string(turn_number) + " of " +
                std::to_string(config_.max_turns) + " used";
    transcript_.turns.push_back({model_message, response, wall});

    if (turn_number >= config_.max_turns) {
        transcript_.terminal_reason = TerminalReason::TurnsExhausted;
        terminal_ = true;
        return std::nullopt;
    }
    return response;
}

void Episode::abort_client_error() {
    if (terminal_) return;
    transcript_.terminal_reason = TerminalReason::ClientError;
    terminal_ = true;
}

}  // namespace sqleval
