#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqleval/executor.hpp"

namespace sqleval {

enum class GradingMethod { SetBased, SubsetBased, ListBased };

std::string_view to_string(GradingMethod method);
std::optional<GradingMethod> grading_from_string(std::string_view text);

struct TextToSqlInstance {
    std::string id;
    std::string db_id;
    std::string question;
    std::string external_knowledge;  // serialized as "evidence"
    std::string gold_sql;
    GradingMethod grading = GradingMethod::SetBased;
    std::optional<std::int64_t> required_size;  // subset grading only

    bool operator==(const TextToSqlInstance&) const = default;
};

struct LoadResult {
    std::vector<TextToSqlInstance> instances;
    std::vector<std::string> warnings;  // lenient-mode downgrades
};

// Load instance records from an instances.json file (or a dataset root
// containing one). Strict mode rejects unknown grading variants and
// subset records without a size; lenient mode downgrades both to
// set-based grading with a warning.
LoadResult load_instances(const std::filesystem::path& path, bool strict);

// Field-for-field serialization of a dataset, the inverse of load_instances.
std::string serialize_instances(const std::vector<TextToSqlInstance>& instances);

// table -> column -> description
using ColumnDescriptions = std::map<std::string, std::map<std::string, std::string>>;

// Standard benchmark layout:
//   <root>/instances.json
//   <root>/databases/<db_id>/<db_id>.sqlite
//   <root>/column_descriptions/<db_id>.csv   (optional; table,column,description)
class DatasetRoot {
  public:
    explicit DatasetRoot(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path instances_path() const;
    std::filesystem::path database_path(const std::string& db_id) const;
    ColumnDescriptions column_descriptions(const std::string& db_id) const;

    Database open_database(const std::string& db_id) const;
    LoadResult load(bool strict) const;

  private:
    std::filesystem::path root_;
};

struct SchemaPrompt {
    std::string text;
    std::vector<std::string> tables;
    // "table.column" -> note ("description: ..." or "examples: a, b, c")
    std::map<std::string, std::string> column_notes;
};

// Render the full schema in DDL, annotating each column with its provided
// description or with up to max_examples distinct non-null values (first
// values in ascending order, so the prompt is deterministic).
SchemaPrompt render_schema(const Database& db, const TextToSqlInstance& instance,
                           int max_examples = 3,
                           const ColumnDescriptions& descriptions = {});

enum class ValidationFlag { GoldExecutionError, EmptyGold, InsufficientGoldRows };

std::string_view to_string(ValidationFlag flag);

struct ValidationReport {
    std::string instance_id;
    std::vector<ValidationFlag> flags;
    std::string detail;

    bool clean() const { return flags.empty(); }
    bool has(ValidationFlag flag) const;
};

// Check the gold annotation: the gold SQL must execute, return a non-empty
// result, and (for subset grading) return at least required_size distinct
// rows. Failures are report entries, never exceptions.
ValidationReport validate_instance(const TextToSqlInstance& instance, const Database& db,
                                   std::chrono::milliseconds timeout);

}  // namespace sqleval
