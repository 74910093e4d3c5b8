#include "sqleval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "sqleval/errors.hpp"

namespace sqleval {

const std::array<std::string_view, 8> kComplexityColumnNames = {
    "tables",     "joins",      "functions", "aggregations",
    "set_operations", "subqueries", "ctes",      "window_functions"};

ComplexityProfile& ComplexityProfile::operator+=(const ComplexityProfile& other) {
    tables += other.tables;
    joins += other.joins;
    functions += other.functions;
    aggregations += other.aggregations;
    set_operations += other.set_operations;
    subqueries += other.subqueries;
    ctes += other.ctes;
    window_functions += other.window_functions;
    return *this;
}

namespace {

enum class TokenKind { Word, QuotedWord, Number, String, Punct };

struct Token {
    TokenKind kind;
    std::string text;   // raw payload (unquoted for identifiers)
    std::string upper;  // uppercase form for Word tokens
    char punct = 0;
};

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::string to_upper(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::vector<Token> tokenize(std::string_view sql) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = sql.size();

    while (i < n) {
        const char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // comments
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            const std::size_t close = sql.find("*/", i + 2);
            if (close == std::string_view::npos) throw ParseError("unterminated block comment");
            i = close + 2;
            continue;
        }
        // string literal (also x'..' blob literal)
        if (c == '\'' || ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'')) {
            if (c != '\'') ++i;  // skip blob prefix
            std::size_t j = i + 1;
            std::string value;
            while (true) {
                if (j >= n) throw ParseError("unterminated string literal");
                if (sql[j] == '\'') {
                    if (j + 1 < n && sql[j + 1] == '\'') {
                        value.push_back('\'');
                        j += 2;
                        continue;
                    }
                    break;
                }
                value.push_back(sql[j]);
                ++j;
            }
            tokens.push_back({TokenKind::String, std::move(value), "", 0});
            i = j + 1;
            continue;
        }
        // quoted identifiers: "x", [x], `x`
        if (c == '"' || c == '[' || c == '`') {
            const char close = c == '[' ? ']' : c;
            std::size_t j = i + 1;
            std::string value;
            while (true) {
                if (j >= n) throw ParseError("unterminated quoted identifier");
                if (sql[j] == close) {
                    if (close != ']' && j + 1 < n && sql[j + 1] == close) {
                        value.push_back(close);
                        j += 2;
                        continue;
                    }
                    break;
                }
                value.push_back(sql[j]);
                ++j;
            }
            Token token{TokenKind::QuotedWord, std::move(value), "", 0};
            token.upper = to_upper(token.text);
            tokens.push_back(std::move(token));
            i = j + 1;
            continue;
        }
        // numbers
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '.' ||
                             ((sql[j] == '+' || sql[j] == '-') && j > i &&
                              (sql[j - 1] == 'e' || sql[j - 1] == 'E')))) {
                ++j;
            }
            tokens.push_back({TokenKind::Number, std::string(sql.substr(i, j - i)), "", 0});
            i = j;
            continue;
        }
        // words
        if (is_word_start(c)) {
            std::size_t j = i;
            while (j < n && is_word_char(sql[j])) ++j;
            Token token{TokenKind::Word, std::string(sql.substr(i, j - i)), "", 0};
            token.upper = to_upper(token.text);
            tokens.push_back(std::move(token));
            i = j;
            continue;
        }
        tokens.push_back({TokenKind::Punct, std::string(1, c), "", c});
        ++i;
    }
    return tokens;
}

const std::unordered_set<std::string>& aggregate_names() {
    static const std::unordered_set<std::string> names = {
        "COUNT", "SUM", "AVG", "MIN", "MAX", "TOTAL", "GROUP_CONCAT"};
    return names;
}

// Words that may precede '(' without being a function call, and that never
// name a base table.
const std::unordered_set<std::string>& reserved_words() {
    static const std::unordered_set<std::string> names = {
        "ALL",       "AND",      "AS",        "ASC",      "BETWEEN",   "BY",
        "CASE",      "COLLATE",  "CROSS",     "CURRENT",  "DELETE",    "DESC",
        "DISTINCT",  "ELSE",     "END",       "ESCAPE",   "EXCEPT",    "EXCLUDE",
        "EXISTS",    "FILTER",   "FOLLOWING", "FROM",     "FULL",      "GLOB",
        "GROUP",     "GROUPS",   "HAVING",    "IN",       "INDEXED",   "INNER",
        "INSERT",    "INTERSECT","INTO",      "IS",       "ISNULL",    "JOIN",
        "LEFT",      "LIKE",     "LIMIT",     "MATCH",    "MATERIALIZED",
        "NATURAL",   "NOT",      "NOTNULL",   "NULL",     "OFFSET",    "ON",
        "OR",        "ORDER",    "OTHERS",    "OUTER",    "OVER",      "PARTITION",
        "PRECEDING", "RANGE",    "RECURSIVE", "REGEXP",   "RETURNING", "RIGHT",
        "ROWS",      "SELECT",   "SET",       "THEN",     "TIES",      "UNBOUNDED",
        "UNION",     "UPDATE",   "USING",     "VALUES",   "WHEN",      "WHERE",
        "WINDOW",    "WITH"};
    return names;
}

class StructureScanner {
  public:
    explicit StructureScanner(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ComplexityProfile run() {
        while (pos_ < tokens_.size()) {
            parse_query();
            if (pos_ < tokens_.size()) {
                if (is_punct(pos_, ';')) {
                    ++pos_;
                } else {
                    throw ParseError("unbalanced ')'");
                }
            }
        }
        return counts_;
    }

  private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    ComplexityProfile counts_;
    std::vector<std::string> cte_names_;  // uppercase, whole-statement visibility

    bool is_punct(std::size_t at, char c) const {
        return at < tokens_.size() && tokens_[at].kind == TokenKind::Punct &&
               tokens_[at].punct == c;
    }

    bool is_word(std::size_t at, const char* upper) const {
        return at < tokens_.size() && tokens_[at].kind == TokenKind::Word &&
               tokens_[at].upper == upper;
    }

    bool is_name(std::size_t at) const {
        if (at >= tokens_.size()) return false;
        const Token& t = tokens_[at];
        if (t.kind == TokenKind::QuotedWord) return true;
        return t.kind == TokenKind::Word && reserved_words().count(t.upper) == 0;
    }

    // A WITH-prefixed or plain query body; stops at EOF, ';', or an
    // unconsumed ')' belonging to the caller.
    void parse_query() {
        if (is_word(pos_, "WITH")) parse_with_clause();
        scan_scope(false);
    }

    void parse_with_clause() {
        ++pos_;  // WITH
        if (is_word(pos_, "RECURSIVE")) ++pos_;
        while (true) {
            if (!is_name(pos_)) throw ParseError("malformed WITH clause: expected CTE name");
            ++counts_.ctes;
            cte_names_.push_back(tokens_[pos_].upper);
            ++pos_;
            if (is_punct(pos_, '(')) skip_balanced();  // column list
            if (!is_word(pos_, "AS")) throw ParseError("malformed WITH clause: expected AS");
            ++pos_;
            if (is_word(pos_, "NOT")) ++pos_;
            if (is_word(pos_, "MATERIALIZED")) ++pos_;
            if (!is_punct(pos_, '(')) throw ParseError("malformed WITH clause: expected (");
            ++pos_;
            parse_query();  // CTE body is not a subquery
            if (!is_punct(pos_, ')')) throw ParseError("malformed WITH clause: expected )");
            ++pos_;
            if (is_punct(pos_, ',')) {
                ++pos_;
                continue;
            }
            break;
        }
    }

    void skip_balanced() {
        ++pos_;  // '('
        int depth = 1;
        while (pos_ < tokens_.size() && depth > 0) {
            if (is_punct(pos_, '(')) ++depth;
            if (is_punct(pos_, ')')) --depth;
            ++pos_;
        }
        if (depth != 0) throw ParseError("unbalanced '('");
    }

    // Scan one scope. in_from starts true inside parenthesized join groups.
    void scan_scope(bool start_in_from) {
        bool in_from = start_in_from;
        bool expect_table = start_in_from;

        while (pos_ < tokens_.size()) {
            const Token& token = tokens_[pos_];

            if (token.kind == TokenKind::Punct) {
                if (token.punct == ')') return;  // caller consumes
                if (token.punct == ';') return;  // statement boundary, run() consumes
                if (token.punct == '(') {
                    const bool table_position = expect_table;
                    ++pos_;
                    if (is_word(pos_, "SELECT") || is_word(pos_, "WITH")) {
                        ++counts_.subqueries;
                        parse_query();
                    } else {
                        scan_scope(table_position);
                    }
                    if (!is_punct(pos_, ')')) throw ParseError("unbalanced '('");
                    ++pos_;
                    expect_table = false;
                    continue;
                }
                if (token.punct == ',' && in_from) {
                    ++counts_.joins;
                    expect_table = true;
                    ++pos_;
                    continue;
                }
                ++pos_;
                continue;
            }

            if (token.kind == TokenKind::Word || token.kind == TokenKind::QuotedWord) {
                const bool callable = token.kind == TokenKind::Word &&
                                      reserved_words().count(token.upper) == 0;
                if (callable && is_punct(pos_ + 1, '(')) {
                    if (aggregate_names().count(token.upper) > 0) {
                        ++counts_.aggregations;
                    } else {
                        ++counts_.functions;
                    }
                    // A table-valued function in a FROM clause is a function,
                    // not a base table.
                    expect_table = false;
                    ++pos_;
                    continue;  // '(' handled by the punct branch
                }

                if (token.kind == TokenKind::Word) {
                    const std::string& word = token.upper;
                    if (word == "FROM") {
                        in_from = true;
                        expect_table = true;
                        ++pos_;
                        continue;
                    }
                    if (word == "JOIN") {
                        ++counts_.joins;
                        in_from = true;
                        expect_table = true;
                        ++pos_;
                        continue;
                    }
                    if (word == "UNION" || word == "INTERSECT" || word == "EXCEPT") {
                        ++counts_.set_operations;
                        in_from = false;
                        expect_table = false;
                        ++pos_;
                        if (is_word(pos_, "ALL")) ++pos_;
                        continue;
                    }
                    if (word == "OVER") {
                        ++counts_.window_functions;
                        ++pos_;
                        continue;
                    }
                    if (word == "WHERE" || word == "GROUP" || word == "HAVING" ||
                        word == "ORDER" || word == "LIMIT" || word == "OFFSET" ||
                        word == "WINDOW" || word == "SELECT") {
                        in_from = false;
                        expect_table = false;
                        ++pos_;
                        continue;
                    }
                    if (word == "ON" || word == "USING") {
                        expect_table = false;
                        ++pos_;
                        continue;
                    }
                }

                if (expect_table && is_name(pos_)) {
                    consume_table_reference();
                    expect_table = false;
                    continue;
                }
                ++pos_;
                continue;
            }

            ++pos_;  // numbers, strings
        }
    }

    void consume_table_reference() {
        const Token first = tokens_[pos_];
        ++pos_;
        bool qualified = false;
        while (is_punct(pos_, '.') && is_name(pos_ + 1)) {
            qualified = true;
            pos_ += 2;
        }
        // Only unqualified names can refer to CTEs.
        if (!qualified && std::find(cte_names_.begin(), cte_names_.end(), first.upper) !=
                              cte_names_.end()) {
            return;
        }
        ++counts_.tables;
    }
};

}  // namespace

ComplexityProfile complexity_profile(std::string_view sql) {
    std::vector<Token> tokens = tokenize(sql);
    if (tokens.empty()) throw ParseError("empty statement");
    return StructureScanner(std::move(tokens)).run();
}

std::array<double, 8> profile_means_order(const ComplexityProfile& totals, double denominator) {
    return {
        static_cast<double>(totals.tables) / denominator,
        static_cast<double>(totals.joins) / denominator,
        static_cast<double>(totals.functions) / denominator,
        static_cast<double>(totals.aggregations) / denominator,
        static_cast<double>(totals.set_operations) / denominator,
        static_cast<double>(totals.subqueries) / denominator,
        static_cast<double>(totals.ctes) / denominator,
        static_cast<double>(totals.window_functions) / denominator,
    };
}

namespace {

CorpusStats corpus_stats_impl(const std::vector<std::string>& queries, bool parallel) {
    if (queries.empty()) throw AllUnparseable("empty corpus");

    std::vector<ComplexityProfile> profiles(queries.size());
    std::vector<std::string> errors(queries.size());
    std::vector<char> ok(queries.size(), 0);

    const std::int64_t n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            profiles[i] = complexity_profile(queries[i]);
            ok[i] = 1;
        } catch (const ParseError& e) {
            errors[i] = e.what();
        }
    }

    CorpusStats stats;
    ComplexityProfile totals;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (ok[i]) {
            totals += profiles[i];
            ++stats.counted;
        } else {
            stats.excluded.emplace_back(i, errors[i]);
        }
    }
    if (stats.counted == 0) throw AllUnparseable("no query in the corpus parses");
    stats.means = profile_means_order(totals, static_cast<double>(stats.counted));
    return stats;
}

}  // namespace

CorpusStats corpus_stats(const std::vector<std::string>& queries) {
    return corpus_stats_impl(queries, true);
}

CorpusStats corpus_stats_serial(const std::vector<std::string>& queries) {
    return corpus_stats_impl(queries, false);
}

}  // namespace sqleval
