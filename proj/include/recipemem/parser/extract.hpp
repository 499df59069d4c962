#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "recipemem/core/error.hpp"
#include "recipemem/llm/gateway.hpp"
#include "recipemem/parser/recipe_xml.hpp"

namespace recipemem::parser {

inline constexpr int kDefaultRepairAttempts = 2;
inline constexpr std::string_view kRecipePromptVersion = "recipe-extract-v1";

// The model never produced schema-valid XML within 1 + repair attempts.
class ExtractionError : public StageError {
 public:
  ExtractionError(const std::string& message, std::string last_reply)
      : StageError(message), last_reply_(std::move(last_reply)) {}
  const std::string& last_reply() const { return last_reply_; }

 private:
  std::string last_reply_;
};

struct ExtractOptions {
  std::string model_id;
  int max_tokens = 2048;
  int repair_attempts = kDefaultRepairAttempts;
};

struct XmlExtraction {
  RecipeXml xml;
  RecipeLists lists;
  int repairs = 0;  // re-prompts that were needed
};

// Sends `prompt`, then re-prompts with the parser error until the reply holds
// schema-valid XML. Temperature 0 throughout.
XmlExtraction extract_xml_with_repair(const std::string& prompt, const llm::Gateway& gateway,
                                      const ExtractOptions& options);

std::string build_repair_prompt(const std::string& prompt, std::string_view bad_reply, std::string_view error);

std::string build_recipe_extraction_prompt(std::string_view recipe_text);

// Generated recipe text -> XML in the shared schema.
XmlExtraction extract_structured(std::string_view recipe_text, const llm::Gateway& gateway,
                                 const ExtractOptions& options);

// Last word of the tool name, lowercased: "large mixing bowl" -> "bowl".
std::string tool_category(std::string_view tool);

// Carries each explicitly named tool forward to later triples that share an
// ingredient with the introducing triple, until a later triple names its own
// tool of the same category. Appends only; idempotent.
std::vector<TaskTriple> propagate_tools(std::vector<TaskTriple> tasks);

}  // namespace recipemem::parser
