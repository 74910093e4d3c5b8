#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqleval/value.hpp"

struct sqlite3;

namespace sqleval {

// Read-only connection to an embedded SQLite database file. One connection
// per in-flight query; connections are not shared across threads.
class Database {
  public:
    static Database open_read_only(const std::filesystem::path& path);

    // In-memory database, used by tests and fixture builders. Writable.
    static Database open_memory();

    // Writable connection for building fixture databases.
    static Database open_read_write(const std::filesystem::path& path);

    Database(Database&&) noexcept;
    Database& operator=(Database&&) noexcept;
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;
    ~Database();

    sqlite3* raw() const { return db_; }
    const std::filesystem::path& path() const { return path_; }

    // Convenience for fixture setup; throws Error on failure.
    void exec_script(const std::string& sql);

  private:
    explicit Database(sqlite3* db, std::filesystem::path path);
    sqlite3* db_ = nullptr;
    std::filesystem::path path_;
};

enum class ExecStatus { Ok, CompileError, RuntimeError, Timeout };

std::string_view to_string(ExecStatus status);

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::RuntimeError;
    std::optional<CanonicalTable> table;  // present iff status == Ok
    std::string message;                  // present iff status != Ok
    std::chrono::duration<double> wall_time{0.0};

    bool ok() const { return status == ExecStatus::Ok; }
};

// Execute SQL under a timeout and canonicalize the result. Statements are
// run in order and the last statement's result is kept; the connection is
// read-only, so any write attempt surfaces as a RuntimeError. A timeout
// interrupts the engine via its progress handler rather than abandoning
// the call.
ExecutionOutcome execute(const Database& db, std::string_view sql,
                         std::chrono::milliseconds timeout,
                         std::vector<std::string>* column_names = nullptr);

}  // namespace sqleval
