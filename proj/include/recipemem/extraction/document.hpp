#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recipemem/core/records.hpp"
#include "recipemem/core/types.hpp"
#include "recipemem/llm/gateway.hpp"
#include "recipemem/parser/extract.hpp"

namespace recipemem::extraction {

inline constexpr std::string_view kDocumentPromptVersion = "document-extract-v1";

// Visible text of an HTML page, one line per block element or list item.
// script/style/noscript/template/svg content, comments and the head are
// dropped; entities are decoded; whitespace runs collapse; empty lines go.
std::string html_to_text(std::string_view html);

struct ExtractedDocument {
  std::string document_id;
  std::vector<std::string> ingredients;
  std::vector<TaskTriple> tasks;
  std::string extraction_model;
  bool valid = false;
  std::string invalid_reason;
  int repairs = 0;
  bool from_cache = false;

  friend bool operator==(const ExtractedDocument&, const ExtractedDocument&) = default;
};

Json extracted_to_json(const ExtractedDocument& doc);
ExtractedDocument extracted_from_json(const Json& j);

// Key over (text, model, prompt version).
std::string extraction_cache_key(std::string_view text, std::string_view model_id);

// cache_dir/<document_id>.<model-slug>.xml, first line "<!-- cache-key: K -->".
// Entries whose key differs are treated as absent.
class ExtractionCache {
 public:
  explicit ExtractionCache(std::string dir);

  std::string path(const std::string& document_id, const std::string& model_id) const;
  struct Entry {
    std::string xml;
    int repairs = 0;
  };
  std::optional<Entry> get(const std::string& document_id, const std::string& model_id, const std::string& key) const;
  void put(const std::string& document_id, const std::string& model_id, const std::string& key, const Entry& entry);

 private:
  std::string dir_;
};

std::string build_document_extraction_prompt(std::string_view page_text);

// Never throws for bad model output: irreparable XML gives valid=false with
// the reason. Gateway transport errors propagate. `cache` may be null.
ExtractedDocument extract_document_lists(const std::string& document_id, std::string_view text,
                                         const llm::Gateway& gateway, const parser::ExtractOptions& options,
                                         ExtractionCache* cache = nullptr);

struct ExtractionIssue {
  enum class Severity { Violation, Warning };
  Severity severity = Severity::Violation;
  std::string code;  // "no_ingredients", "no_tasks", "task_without_name", "duplicate_ingredient"
  std::string message;
};

struct ExtractionReport {
  std::vector<ExtractionIssue> issues;
  bool acceptable() const;
  std::string summary() const;  // violations joined with "; "
};

ExtractionReport validate_extraction(const ExtractedDocument& doc);

}  // namespace recipemem::extraction
