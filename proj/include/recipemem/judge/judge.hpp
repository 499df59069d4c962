#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/labels.hpp"
#include "recipemem/core/records.hpp"
#include "recipemem/core/time.hpp"
#include "recipemem/core/types.hpp"
#include "recipemem/extraction/document.hpp"
#include "recipemem/llm/gateway.hpp"

namespace recipemem::judge {

struct Choice {
  Label label;
  std::string text;  // continuation shown to the model, the label's display text
};

struct Taxonomy {
  ItemKind kind = ItemKind::Ingredient;
  std::string description;
  std::vector<Choice> choices;
};

// Throws ConfigError unless there are >= 2 choices with distinct texts, all of `kind`.
void validate_taxonomy(const Taxonomy& taxonomy);

// The four judge taxonomies. Ingredients never include Implied; tasks use
// two or four classes.
class TaxonomySet {
 public:
  static TaxonomySet defaults(TaskScheme tasks = TaskScheme::FourClass);
  // {"version":"1","kinds":{"Ingredient":{"description":..,"choices":[ids]},..}}
  static TaxonomySet parse(std::string_view json_text, TaskScheme tasks = TaskScheme::FourClass);
  static TaxonomySet load(const std::string& path, TaskScheme tasks = TaskScheme::FourClass);

  const Taxonomy& get(ItemKind kind) const;
  const std::string& version() const { return version_; }
  TaskScheme task_scheme() const { return task_scheme_; }

 private:
  std::string version_;
  TaskScheme task_scheme_ = TaskScheme::FourClass;
  std::map<ItemKind, Taxonomy> kinds_;
};

// A generated item to judge.
struct JudgeItem {
  ItemKey key;
  std::string text;         // ingredient name, task action, tools or ingredients
  std::string task_action;  // empty for ingredients
};

JudgeItem make_item(const GeneratedRecipe& recipe, ItemKind kind, int ordinal);

struct PromptPair {
  std::string prefix;
  std::string continuation;  // " " + choice text
};

// The document's list relevant to the item kind, one entry per line.
std::vector<std::string> document_list(const extraction::ExtractedDocument& doc, ItemKind kind);

// N pairs sharing one byte-identical prefix (task description, item, the
// document's list); only the continuation differs. Throws PreconditionError
// for an invalid document or an empty list.
std::vector<PromptPair> build_choice_prompts(const JudgeItem& item, const extraction::ExtractedDocument& doc,
                                             const Taxonomy& taxonomy);

struct JudgeDecision {
  AnnotationRecord record;       // annotator = model id
  std::vector<double> scores;    // per choice, taxonomy order; empty when auto-resolved
  std::optional<double> margin;  // top1 - top2
  bool auto_resolved = false;
};

Json decision_to_json(const JudgeDecision& d, const Taxonomy* taxonomy);
JudgeDecision decision_from_json(const Json& j);

// Highest score wins; an exact tie goes to the earlier choice.
std::size_t argmax_choice(const std::vector<double>& scores);

// Scores every continuation; any failing call propagates (no default label).
JudgeDecision classify(const JudgeItem& item, const extraction::ExtractedDocument& doc, const Taxonomy& taxonomy,
                       const llm::Gateway& gateway, const std::string& model_id, Timestamp at);

struct JudgeFailure {
  std::string model_id;
  ItemKey item;
  std::string document_id;
  std::string error;
};

struct StudyInput {
  GeneratedRecipe recipe;
  std::vector<extraction::ExtractedDocument> documents;
};

struct JudgeRun {
  std::vector<JudgeDecision> decisions;  // (model, recipe, document, item order)
  std::vector<JudgeFailure> failures;
  std::vector<std::string> invalid_documents;  // "recipe/document_id", once per study
  int scoring_calls = 0;
};

struct JudgeOptions {
  std::vector<std::string> model_ids;
  int max_parallel_documents = 4;
  Clock clock = system_clock();
};

// One decision per (model, recipe, valid document, item). Tool and
// ingredient-list fields are NotFilledIn without scoring when the same model
// chose TaskNotFound for the task name, or when the generated field is empty.
JudgeRun judge_study(const std::vector<StudyInput>& inputs, const TaxonomySet& taxonomies,
                     const llm::Gateway& gateway, const JudgeOptions& options);

}  // namespace recipemem::judge
