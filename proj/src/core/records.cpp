#include "recipemem/core/records.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem {
namespace {

const Json& require(const Json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) throw FormatError(std::string("record is missing '") + key + "'");
  return *it;
}

std::string require_string(const Json& object, const char* key) {
  const Json& v = require(object, key);
  if (!v.is_string()) throw FormatError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

Json record_to_json(const AnnotationRecord& r) {
  Json j = Json::object();
  j["annotator"] = r.annotator;
  j["recipe"] = r.recipe;
  j["document_id"] = r.document_id;
  j["item_kind"] = std::string(to_string(r.item_kind));
  j["item_ordinal"] = r.item_ordinal;
  j["label"] = std::string(label_id(r.label));
  j["timestamp"] = format_timestamp(r.timestamp);
  return j;
}

AnnotationRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("record must be a JSON object");
  AnnotationRecord r;
  r.annotator = require_string(j, "annotator");
  r.recipe = require_string(j, "recipe");
  r.document_id = require_string(j, "document_id");
  r.item_kind = parse_item_kind(require_string(j, "item_kind"));
  const Json& ord = require(j, "item_ordinal");
  if (!ord.is_number_integer()) throw FormatError("'item_ordinal' must be an integer");
  r.item_ordinal = ord.get<int>();
  if (r.item_ordinal < 0) throw FormatError("'item_ordinal' must be non-negative");
  r.label = parse_label(r.item_kind, require_string(j, "label"));
  r.timestamp = parse_timestamp(require_string(j, "timestamp"));
  if (r.annotator.empty()) throw FormatError("'annotator' must be non-empty");
  if (r.recipe.empty()) throw FormatError("'recipe' must be non-empty");
  return r;
}

std::string to_line(const AnnotationRecord& record) { return record_to_json(record).dump(); }

AnnotationRecord parse_record_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  return record_from_json(j);
}

std::vector<AnnotationRecord> read_records(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_record_line(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<AnnotationRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_records(in);
}

void write_records(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  for (const auto& r : records) out << to_line(r) << '\n';
}

void sort_canonical(std::vector<AnnotationRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const AnnotationRecord& a, const AnnotationRecord& b) { return key_of(a) < key_of(b); });
}

Json task_to_json(const TaskTriple& task) {
  Json tools = Json::array();
  for (const auto& t : task.tools) tools.push_back(Json{{"name", t.name}, {"propagated", t.propagated}});
  Json j = Json::object();
  j["ordinal"] = task.ordinal;
  j["action"] = task.action;
  j["tools"] = std::move(tools);
  j["ingredients"] = task.ingredients;
  return j;
}

TaskTriple task_from_json(const Json& j) {
  TaskTriple t;
  t.ordinal = j.at("ordinal").get<int>();
  t.action = j.at("action").get<std::string>();
  for (const auto& tool : j.at("tools")) {
    t.tools.push_back({tool.at("name").get<std::string>(), tool.value("propagated", false)});
  }
  t.ingredients = j.at("ingredients").get<std::vector<std::string>>();
  return t;
}

Json recipe_to_json(const GeneratedRecipe& r) {
  Json ingredients = Json::array();
  for (const auto& m : r.ingredients) ingredients.push_back(Json{{"ordinal", m.ordinal}, {"name", m.name}});
  Json tasks = Json::array();
  for (const auto& t : r.tasks) tasks.push_back(task_to_json(t));
  Json j = Json::object();
  j["name"] = r.name.text;
  if (r.name.origin_tag) j["origin_tag"] = *r.name.origin_tag;
  j["generator_id"] = r.generator_id;
  j["prompt_type"] = r.prompt_type;
  j["variant"] = r.variant;
  j["raw_text"] = r.raw_text;
  j["ingredients"] = std::move(ingredients);
  j["tasks"] = std::move(tasks);
  return j;
}

GeneratedRecipe recipe_from_json(const Json& j) {
  GeneratedRecipe r;
  try {
    r.name.text = j.at("name").get<std::string>();
    if (j.contains("origin_tag")) r.name.origin_tag = j.at("origin_tag").get<std::string>();
    r.generator_id = j.value("generator_id", "");
    r.prompt_type = j.value("prompt_type", 2);
    r.variant = j.value("variant", 1);
    r.raw_text = j.value("raw_text", "");
    for (const auto& m : j.at("ingredients")) {
      r.ingredients.push_back({m.at("name").get<std::string>(), m.at("ordinal").get<int>()});
    }
    for (const auto& t : j.at("tasks")) r.tasks.push_back(task_from_json(t));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed recipe: ") + e.what());
  }
  return r;
}

std::vector<Json> read_json_lines(std::istream& in) {
  std::vector<Json> rows;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Json> read_json_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_json_lines(in);
}

void write_json_lines(const std::string& path, const std::vector<Json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump(-1, ' ', false, Json::error_handler_t::replace);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace recipemem
