#include "sqleval/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sqleval/errors.hpp"

namespace sqleval {

std::string_view to_string(GradingMethod method) {
    switch (method) {
        case GradingMethod::SetBased: return "set";
        case GradingMethod::SubsetBased: return "subset";
        case GradingMethod::ListBased: return "list";
    }
    return "set";
}

std::optional<GradingMethod> grading_from_string(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "set" || lower == "set_based" || lower == "setbased") {
        return GradingMethod::SetBased;
    }
    if (lower == "subset" || lower == "subset_based" || lower == "subsetbased") {
        return GradingMethod::SubsetBased;
    }
    if (lower == "list" || lower == "list_based" || lower == "listbased") {
        return GradingMethod::ListBased;
    }
    return std::nullopt;
}

namespace {

using nlohmann::json;

std::string field_as_string(const json& record, const char* key, const std::string& context) {
    if (!record.contains(key)) {
        throw MalformedRecord(context + ": missing field '" + key + "'");
    }
    const json& value = record.at(key);
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
    throw MalformedRecord(context + ": field '" + key + "' is not a string");
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRecord("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw MalformedRecord("invalid JSON in " + path.string() + ": " + e.what());
    }
    return doc;
}

}  // namespace

LoadResult load_instances(const std::filesystem::path& path, bool strict) {
    std::filesystem::path file = path;
    if (std::filesystem::is_directory(file)) file /= "instances.json";

    const json doc = load_json_file(file);
    if (!doc.is_array()) throw MalformedRecord(file.string() + ": expected a JSON array");

    LoadResult result;
    std::set<std::string> seen_ids;
    std::size_t index = 0;
    for (const json& record : doc) {
        const std::string context = "record #" + std::to_string(index++);
        if (!record.is_object()) throw MalformedRecord(context + ": not an object");

        TextToSqlInstance instance;
        instance.id = field_as_string(record, "id", context);
        instance.db_id = field_as_string(record, "db_id", context);
        instance.question = field_as_string(record, "question", context);
        if (record.contains("evidence")) {
            if (!record.at("evidence").is_string()) {
                throw MalformedRecord(context + ": field 'evidence' is not a string");
            }
            instance.external_knowledge = record.at("evidence").get<std::string>();
        }
        instance.gold_sql = field_as_string(record, "SQL", context);
        if (instance.gold_sql.empty()) {
            throw MalformedRecord(context + ": empty gold SQL");
        }

        if (record.contains("grading")) {
            const std::string raw = field_as_string(record, "grading", context);
            const auto method = grading_from_string(raw);
            if (!method) {
                if (strict) {
                    throw MalformedRecord(context + ": unknown grading variant '" + raw + "'");
                }
                result.warnings.push_back(context + " (id " + instance.id +
                                          "): unknown grading '" + raw +
                                          "', defaulting to set-based");
                instance.grading = GradingMethod::SetBased;
            } else {
                instance.grading = *method;
            }
        }

        if (record.contains("required_size")) {
            const json& size = record.at("required_size");
            if (!size.is_number_integer() || size.get<std::int64_t>() <= 0) {
                throw MalformedRecord(context + ": required_size must be a positive integer");
            }
            instance.required_size = size.get<std::int64_t>();
        }

        if (instance.grading == GradingMethod::SubsetBased && !instance.required_size) {
            if (strict) {
                throw MalformedRecord(context + ": subset grading without required_size");
            }
            result.warnings.push_back(context + " (id " + instance.id +
                                      "): subset grading without required_size, "
                                      "defaulting to set-based");
            instance.grading = GradingMethod::SetBased;
        }

        if (!seen_ids.insert(instance.id).second) {
            throw DuplicateId("duplicate instance id '" + instance.id + "'");
        }
        result.instances.push_back(std::move(instance));
    }
    return result;
}

std::string serialize_instances(const std::vector<TextToSqlInstance>& instances) {
    json doc = json::array();
    for (const TextToSqlInstance& instance : instances) {
        json record;
        record["id"] = instance.id;
        record["db_id"] = instance.db_id;
        record["question"] = instance.question;
        record["evidence"] = instance.external_knowledge;
        record["SQL"] = instance.gold_sql;
        record["grading"] = std::string(to_string(instance.grading));
        if (instance.required_size) record["required_size"] = *instance.required_size;
        doc.push_back(std::move(record));
    }
    return doc.dump(2);
}

DatasetRoot::DatasetRoot(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path DatasetRoot::instances_path() const { return root_ / "instances.json"; }

std::filesystem::path DatasetRoot::database_path(const std::string& db_id) const {
    return root_ / "databases" / db_id / (db_id + ".sqlite");
}

namespace {

// Minimal CSV reader for (table, column, description) files. Handles quoted
// fields with doubled quotes and multi-line descriptions.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (i < content.size()) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
            row.clear();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

ColumnDescriptions DatasetRoot::column_descriptions(const std::string& db_id) const {
    ColumnDescriptions descriptions;
    const std::filesystem::path path = root_ / "column_descriptions" / (db_id + ".csv");
    if (!std::filesystem::exists(path)) return descriptions;

    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto rows = parse_csv(buffer.str());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 3) continue;
        if (i == 0 && row[0] == "table") continue;  // header
        descriptions[row[0]][row[1]] = row[2];
    }
    return descriptions;
}

Database DatasetRoot::open_database(const std::string& db_id) const {
    return Database::open_read_only(database_path(db_id));
}

LoadResult DatasetRoot::load(bool strict) const { return load_instances(instances_path(), strict); }

namespace {

std::string first_line(const std::string& text) {
    const auto pos = text.find('\n');
    return pos == std::string::npos ? text : text.substr(0, pos);
}

std::string quote_ident(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace

SchemaPrompt render_schema(const Database& db, const TextToSqlInstance& instance,
                           int max_examples, const ColumnDescriptions& descriptions) {
    if (max_examples < 1) max_examples = 1;
    SchemaPrompt prompt;
    (void)instance;

    constexpr std::chrono::milliseconds kMetaTimeout{30000};
    const auto master = execute(db,
                                "SELECT name, sql FROM sqlite_master WHERE type='table' "
                                "AND name NOT LIKE 'sqlite_%' ORDER BY name",
                                kMetaTimeout);
    if (!master.ok()) throw DatabaseUnreadable("cannot read schema: " + master.message);

    std::ostringstream text;
    for (const Row& table_row : master.table->rows) {
        const std::string table = cell_to_string(table_row[0]);
        const std::string ddl = cell_to_string(table_row[1]);
        prompt.tables.push_back(table);
        text << ddl << ";\n";

        const auto info = execute(db, "PRAGMA table_info(" + quote_ident(table) + ")",
                                  kMetaTimeout);
        if (!info.ok()) throw DatabaseUnreadable("cannot read columns of " + table);

        const auto table_desc = descriptions.find(table);
        for (const Row& col_row : info.table->rows) {
            const std::string column = cell_to_string(col_row[1]);
            std::string note;
            if (table_desc != descriptions.end()) {
                const auto col_desc = table_desc->second.find(column);
                if (col_desc != table_desc->second.end() && !col_desc->second.empty()) {
                    note = "description: " + first_line(col_desc->second);
                }
            }
            if (note.empty()) {
                const auto examples = execute(
                    db,
                    "SELECT DISTINCT " + quote_ident(column) + " FROM " + quote_ident(table) +
                        " WHERE " + quote_ident(column) + " IS NOT NULL ORDER BY " +
                        quote_ident(column) + " LIMIT " + std::to_string(max_examples),
                    kMetaTimeout);
                std::string values;
                if (examples.ok()) {
                    for (std::size_t i = 0; i < examples.table->rows.size(); ++i) {
                        if (i > 0) values += ", ";
                        values += cell_to_string(examples.table->rows[i][0]);
                    }
                }
                note = "examples: " + values;
            }
            prompt.column_notes[table + "." + column] = note;
            text << "-- " << table << "." << column << ": " << note << "\n";
        }
        text << "\n";
    }
    prompt.text = text.str();
    return prompt;
}

std::string_view to_string(ValidationFlag flag) {
    switch (flag) {
        case ValidationFlag::GoldExecutionError: return "gold_execution_error";
        case ValidationFlag::EmptyGold: return "empty_gold";
        case ValidationFlag::InsufficientGoldRows: return "insufficient_gold_rows";
    }
    return "unknown";
}

bool ValidationReport::has(ValidationFlag flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

ValidationReport validate_instance(const TextToSqlInstance& instance, const Database& db,
                                   std::chrono::milliseconds timeout) {
    ValidationReport report;
    report.instance_id = instance.id;

    const auto outcome = execute(db, instance.gold_sql, timeout);
    if (!outcome.ok()) {
        report.flags.push_back(ValidationFlag::GoldExecutionError);
        report.detail = outcome.message;
        return report;
    }
    if (outcome.table->rows.empty()) {
        report.flags.push_back(ValidationFlag::EmptyGold);
        report.detail = "gold query returned no rows";
    }
    if (instance.grading == GradingMethod::SubsetBased && instance.required_size) {
        const auto distinct = sorted_distinct_rows(*outcome.table);
        if (static_cast<std::int64_t>(distinct.size()) < *instance.required_size) {
            report.flags.push_back(ValidationFlag::InsufficientGoldRows);
            report.detail = "gold has " + std::to_string(distinct.size()) +
                            " distinct rows, required_size is " +
                            std::to_string(*instance.required_size);
        }
    }
    return report;
}

}  // namespace sqleval
