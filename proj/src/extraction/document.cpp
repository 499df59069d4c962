#include "recipemem/extraction/document.hpp"

#include <filesystem>
#include <set>

#include "recipemem/core/text.hpp"

namespace recipemem::extraction {

namespace fs = std::filesystem;

Json extracted_to_json(const ExtractedDocument& doc) {
  Json j;
  j["document_id"] = doc.document_id;
  j["extraction_model"] = doc.extraction_model;
  j["valid"] = doc.valid;
  j["invalid_reason"] = doc.invalid_reason;
  j["repairs"] = doc.repairs;
  j["ingredients"] = doc.ingredients;
  Json tasks = Json::array();
  for (const auto& t : doc.tasks) tasks.push_back(task_to_json(t));
  j["tasks"] = std::move(tasks);
  return j;
}

ExtractedDocument extracted_from_json(const Json& j) {
  try {
    ExtractedDocument d;
    d.document_id = j.at("document_id").get<std::string>();
    d.extraction_model = j.at("extraction_model").get<std::string>();
    d.valid = j.at("valid").get<bool>();
    d.invalid_reason = j.value("invalid_reason", "");
    d.repairs = j.value("repairs", 0);
    d.ingredients = j.at("ingredients").get<std::vector<std::string>>();
    for (const auto& t : j.at("tasks")) d.tasks.push_back(task_from_json(t));
    return d;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("extracted document: ") + e.what());
  }
}

std::string extraction_cache_key(std::string_view text, std::string_view model_id) {
  std::string material;
  material += kDocumentPromptVersion;
  material += '\0';
  material += model_id;
  material += '\0';
  material += text;
  return stable_hash(material);
}

ExtractionCache::ExtractionCache(std::string dir) : dir_(std::move(dir)) {}

std::string ExtractionCache::path(const std::string& document_id, const std::string& model_id) const {
  return (fs::path(dir_) / (document_id + "." + slugify(model_id) + ".xml")).string();
}

std::optional<ExtractionCache::Entry> ExtractionCache::get(const std::string& document_id,
                                                          const std::string& model_id,
                                                          const std::string& key) const {
  const std::string p = path(document_id, model_id);
  if (!fs::exists(p)) return std::nullopt;
  const std::string content = read_file(p);
  const std::string header = "<!-- cache-key: " + key + " -->\n";
  if (content.compare(0, header.size(), header) != 0) return std::nullopt;
  std::string_view rest = std::string_view(content).substr(header.size());
  Entry e;
  constexpr std::string_view kRepairs = "<!-- repairs: ";
  if (rest.substr(0, kRepairs.size()) == kRepairs) {
    const std::size_t end = rest.find(" -->\n");
    if (end == std::string_view::npos) return std::nullopt;
    e.repairs = std::stoi(std::string(rest.substr(kRepairs.size(), end - kRepairs.size())));
    rest = rest.substr(end + 5);
  }
  e.xml = std::string(rest);
  return e;
}

void ExtractionCache::put(const std::string& document_id, const std::string& model_id, const std::string& key,
                          const Entry& entry) {
  write_file(path(document_id, model_id), "<!-- cache-key: " + key + " -->\n<!-- repairs: " +
                                              std::to_string(entry.repairs) + " -->\n" + entry.xml);
}

std::string build_document_extraction_prompt(std::string_view page_text) {
  std::string p;
  p += "The text below was taken from a web page that may contain a recipe, surrounded by navigation, "
       "advertising, stories and reader comments. Extract only the recipe's ingredient list and its list of "
       "tasks.\n";
  p += "Ingredients: one entry per listed ingredient, without quantities or units.\n";
  p += "Tasks: one entry per action performed in the instructions, named by its verb phrase in the infinitive "
       "(\"whisk\", \"pour in\"), with the tools it uses and the ingredients it involves. When a step works on "
       "several earlier ingredients together, use the word the page uses for them (for example \"mixture\") as "
       "a single ingredient.\n";
  p += "If the page holds no recipe, answer with empty <ingredients/> and <tasks/> blocks.\n";
  p += "Answer with XML only, using exactly these elements:\n";
  p += "<recipe>\n  <ingredients>\n    <ingredient>...</ingredient>\n  </ingredients>\n  <tasks>\n    <task>\n"
       "      <name>...</name>\n      <tool>...</tool>\n      <ingredient>...</ingredient>\n    </task>\n"
       "  </tasks>\n</recipe>\n";
  p += "\nPage text:\n";
  p += page_text;
  p += "\n\nXML:\n";
  return p;
}

ExtractedDocument extract_document_lists(const std::string& document_id, std::string_view text,
                                         const llm::Gateway& gateway, const parser::ExtractOptions& options,
                                         ExtractionCache* cache) {
  if (trim(text).empty()) throw PreconditionError("document " + document_id + " has no text");
  ExtractedDocument doc;
  doc.document_id = document_id;
  doc.extraction_model = options.model_id;

  const std::string key = extraction_cache_key(text, options.model_id);
  std::optional<ExtractionCache::Entry> hit;
  if (cache) hit = cache->get(document_id, options.model_id, key);

  parser::RecipeLists lists;
  if (hit) {
    lists = parser::parse_lists_xml(hit->xml);
    doc.repairs = hit->repairs;
    doc.from_cache = true;
  } else {
    try {
      auto out = parser::extract_xml_with_repair(build_document_extraction_prompt(text), gateway, options);
      lists = std::move(out.lists);
      doc.repairs = out.repairs;
      if (cache) cache->put(document_id, options.model_id, key, {out.xml.raw_xml, out.repairs});
    } catch (const parser::ExtractionError& e) {
      doc.valid = false;
      doc.invalid_reason = e.what();
      doc.repairs = options.repair_attempts;
      return doc;
    }
  }
  for (auto& m : lists.ingredients) doc.ingredients.push_back(std::move(m.name));
  doc.tasks = std::move(lists.tasks);
  const auto report = validate_extraction(doc);
  doc.valid = report.acceptable();
  if (!doc.valid) doc.invalid_reason = report.summary();
  return doc;
}

bool ExtractionReport::acceptable() const {
  for (const auto& i : issues) {
    if (i.severity == ExtractionIssue::Severity::Violation) return false;
  }
  return true;
}

std::string ExtractionReport::summary() const {
  std::string out;
  for (const auto& i : issues) {
    if (i.severity != ExtractionIssue::Severity::Violation) continue;
    if (!out.empty()) out += "; ";
    out += i.message;
  }
  return out;
}

ExtractionReport validate_extraction(const ExtractedDocument& doc) {
  using Severity = ExtractionIssue::Severity;
  ExtractionReport r;
  if (doc.ingredients.empty()) r.issues.push_back({Severity::Violation, "no_ingredients", "no ingredients"});
  if (doc.tasks.empty()) r.issues.push_back({Severity::Violation, "no_tasks", "no tasks"});
  for (const auto& t : doc.tasks) {
    if (trim(t.action).empty()) {
      r.issues.push_back({Severity::Violation, "task_without_name", "task " + std::to_string(t.ordinal) + " has no name"});
    }
  }
  std::set<std::string> seen;
  for (const auto& i : doc.ingredients) {
    if (!seen.insert(to_lower(trim(i))).second) {
      r.issues.push_back({Severity::Warning, "duplicate_ingredient", "ingredient '" + i + "' listed twice"});
    }
  }
  return r;
}

}  // namespace recipemem::extraction
