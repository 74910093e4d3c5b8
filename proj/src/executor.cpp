#include "sqleval/executor.hpp"

#include <sqlite3.h>

#include <cctype>
#include <cstring>
#include <utility>

#include "sqleval/errors.hpp"

namespace sqleval {

Database::Database(sqlite3* db, std::filesystem::path path) : db_(db), path_(std::move(path)) {}

Database::Database(Database&& other) noexcept : db_(other.db_), path_(std::move(other.path_)) {
    other.db_ = nullptr;
}

Database& Database::operator=(Database&& other) noexcept {
    if (this != &other) {
        if (db_ != nullptr) sqlite3_close_v2(db_);
        db_ = other.db_;
        path_ = std::move(other.path_);
        other.db_ = nullptr;
    }
    return *this;
}

Database::~Database() {
    if (db_ != nullptr) sqlite3_close_v2(db_);
}

namespace {

sqlite3* open_with_flags(const std::filesystem::path& path, int flags) {
    sqlite3* db = nullptr;
    const int rc = sqlite3_open_v2(path.string().c_str(), &db, flags, nullptr);
    if (rc != SQLITE_OK) {
        std::string message = db != nullptr ? sqlite3_errmsg(db) : sqlite3_errstr(rc);
        if (db != nullptr) sqlite3_close_v2(db);
        throw DatabaseUnreadable("cannot open database " + path.string() + ": " + message);
    }
    sqlite3_extended_result_codes(db, 1);
    return db;
}

}  // namespace

Database Database::open_read_only(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DatabaseUnreadable("database file not found: " + path.string());
    }
    return Database(open_with_flags(path, SQLITE_OPEN_READONLY), path);
}

Database Database::open_memory() {
    return Database(open_with_flags(":memory:", SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE),
                    ":memory:");
}

Database Database::open_read_write(const std::filesystem::path& path) {
    return Database(open_with_flags(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE), path);
}

void Database::exec_script(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string message = err != nullptr ? err : "unknown error";
        sqlite3_free(err);
        throw Error("exec_script failed: " + message);
    }
}

std::string_view to_string(ExecStatus status) {
    switch (status) {
        case ExecStatus::Ok: return "ok";
        case ExecStatus::CompileError: return "compile_error";
        case ExecStatus::RuntimeError: return "runtime_error";
        case ExecStatus::Timeout: return "timeout";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
    Clock::time_point at;
    bool expired() const { return Clock::now() >= at; }
};

extern "C" int progress_callback(void* ctx) {
    return static_cast<Deadline*>(ctx)->expired() ? 1 : 0;
}

RawCell read_column(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return RawCell::null();
        case SQLITE_INTEGER:
            return RawCell::of_int(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return RawCell::of_float(sqlite3_column_double(stmt, col));
        case SQLITE_TEXT: {
            const unsigned char* text = sqlite3_column_text(stmt, col);
            const int size = sqlite3_column_bytes(stmt, col);
            return RawCell::of_text(std::string(reinterpret_cast<const char*>(text),
                                                static_cast<std::size_t>(size)));
        }
        case SQLITE_BLOB:
        default: {
            const auto* data = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
            const int size = sqlite3_column_bytes(stmt, col);
            std::vector<unsigned char> bytes(data, data + size);
            return RawCell::of_blob(std::move(bytes));
        }
    }
}

bool only_whitespace(const char* begin, const char* end) {
    for (const char* p = begin; p != end; ++p) {
        if (!std::isspace(static_cast<unsigned char>(*p))) return false;
    }
    return true;
}

}  // namespace

ExecutionOutcome execute(const Database& db, std::string_view sql,
                         std::chrono::milliseconds timeout,
                         std::vector<std::string>* column_names) {
    ExecutionOutcome outcome;
    const auto start = Clock::now();
    Deadline deadline{start + timeout};

    // Check roughly every 200 VM opcodes so runaway queries are interrupted
    // close to the deadline.
    sqlite3_progress_handler(db.raw(), 200, progress_callback, &deadline);

    std::string text(sql);
    const char* cursor = text.c_str();
    const char* end = cursor + text.size();

    std::vector<RawRow> rows;
    std::size_t n_cols = 0;
    std::vector<std::string> names;
    bool produced_result = false;
    std::string error_message;
    ExecStatus error_status = ExecStatus::Ok;

    while (cursor < end && !only_whitespace(cursor, end)) {
        sqlite3_stmt* stmt = nullptr;
        const char* tail = nullptr;
        const int prc = sqlite3_prepare_v2(db.raw(), cursor, static_cast<int>(end - cursor),
                                           &stmt, &tail);
        if (prc != SQLITE_OK) {
            error_status = deadline.expired() ? ExecStatus::Timeout : ExecStatus::CompileError;
            error_message = sqlite3_errmsg(db.raw());
            break;
        }
        if (stmt == nullptr) {  // comment or whitespace only
            cursor = tail;
            continue;
        }

        const int cols = sqlite3_column_count(stmt);
        std::vector<RawRow> stmt_rows;
        std::vector<std::string> stmt_names;
        for (int c = 0; c < cols; ++c) {
            const char* name = sqlite3_column_name(stmt, c);
            stmt_names.emplace_back(name != nullptr ? name : "");
        }

        int rc = SQLITE_ROW;
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
            RawRow row;
            row.reserve(static_cast<std::size_t>(cols));
            for (int c = 0; c < cols; ++c) row.push_back(read_column(stmt, c));
            stmt_rows.push_back(std::move(row));
        }
        sqlite3_finalize(stmt);

        if (rc != SQLITE_DONE) {
            if (rc == SQLITE_INTERRUPT || deadline.expired()) {
                error_status = ExecStatus::Timeout;
                error_message = "query timed out after " + std::to_string(timeout.count()) + " ms";
            } else {
                error_status = ExecStatus::RuntimeError;
                error_message = sqlite3_errmsg(db.raw());
            }
            break;
        }

        rows = std::move(stmt_rows);
        n_cols = static_cast<std::size_t>(cols);
        names = std::move(stmt_names);
        produced_result = true;
        cursor = tail;
    }

    sqlite3_progress_handler(db.raw(), 0, nullptr, nullptr);
    outcome.wall_time = Clock::now() - start;

    if (error_status != ExecStatus::Ok) {
        outcome.status = error_status;
        outcome.message = error_message;
        return outcome;
    }
    if (!produced_result) {
        outcome.status = ExecStatus::CompileError;
        outcome.message = "empty statement";
        return outcome;
    }

    outcome.status = ExecStatus::Ok;
    outcome.table = normalize(rows, n_cols);
    if (column_names != nullptr) *column_names = std::move(names);
    return outcome;
}

}  // namespace sqleval
