#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recipemem/core/types.hpp"

namespace recipemem {

using Json = nlohmann::ordered_json;

// Canonical record notation: one flat JSON object per line, keys in the order
// annotator, recipe, document_id, item_kind, item_ordinal, label, timestamp.
Json record_to_json(const AnnotationRecord& record);
AnnotationRecord record_from_json(const Json& object);

std::string to_line(const AnnotationRecord& record);
AnnotationRecord parse_record_line(std::string_view line);

// Blank lines are skipped; any malformed line throws FormatError with its line number.
std::vector<AnnotationRecord> read_records(std::istream& in);
std::vector<AnnotationRecord> read_records_file(const std::string& path);
void write_records(std::ostream& out, const std::vector<AnnotationRecord>& records);

// Sorted by (annotator, recipe, document, item_kind, ordinal).
void sort_canonical(std::vector<AnnotationRecord>& records);

// Domain value <-> JSON, shared by every stage that persists recipes.
Json task_to_json(const TaskTriple& task);
TaskTriple task_from_json(const Json& j);
Json recipe_to_json(const GeneratedRecipe& recipe);
GeneratedRecipe recipe_from_json(const Json& j);

// Reads a JSON Lines file into objects (blank lines skipped).
std::vector<Json> read_json_lines(const std::string& path);
std::vector<Json> read_json_lines(std::istream& in);
void write_json_lines(const std::string& path, const std::vector<Json>& rows);

}  // namespace recipemem
