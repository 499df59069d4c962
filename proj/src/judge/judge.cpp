#include "recipemem/judge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include <json.hpp>

#include "recipemem/core/error.hpp"
#include "recipemem/core/items.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::judge {

namespace {

// Same content as data/taxonomy.json.
constexpr std::string_view kDefaultTaxonomy = R"json({
  "version": "1",
  "kinds": {
    "Ingredient": {
      "description": "You compare an ingredient from a generated recipe with the ingredient list of a recipe published online. Answer Found if the list contains the same ingredient, Found (not perfect) if it contains a close variant (a different cut, form or brand of the same ingredient), and Not found otherwise.",
      "choices": ["Found", "FoundNotPerfect", "NotFound"]
    },
    "TaskName": {
      "description": "You compare a cooking task from a generated recipe with the tasks of a recipe published online. Answer Task Found if the same action is performed on the same ingredients, Task Found (Not Exact Wording) if it is the same action worded differently, Task Found (Wrong Context) if the action appears but on other ingredients or at another stage, and Task Not Found otherwise.",
      "choices": ["TaskFound", "TaskFoundNotExactWording", "TaskFoundWrongContext", "TaskNotFound"],
      "two_class_choices": ["TaskFound", "TaskNotFound"]
    },
    "Tool": {
      "description": "You compare the tools of a cooking task from a generated recipe with the matching task of a recipe published online. Answer Found if the same tool is used, Found (Not Exact) if a similar tool is used, Not Found if another tool is used, Tool Implied if the online task clearly needs the tool without naming it, and No Tool Involved if the online task uses no tool.",
      "choices": ["Found", "FoundNotExact", "NotFound", "ToolImplied", "NoToolInvolved"]
    },
    "IngredientList": {
      "description": "You compare the ingredients used in a cooking task from a generated recipe with the matching task of a recipe published online. Answer Ingredients Match if all of them match, Most Ingredients Match, Some Ingredients Match or No Ingredients Match by how many match, Ingredients Implied if the online task uses them without naming them, and No Ingredients Used if the online task uses none.",
      "choices": ["IngredientsMatch", "MostIngredientsMatch", "SomeIngredientsMatch", "NoIngredientsMatch", "IngredientsImplied", "NoIngredientsUsed"]
    }
  }
})json";

std::string_view item_heading(ItemKind kind) {
  switch (kind) {
    case ItemKind::Ingredient: return "Ingredient from the generated recipe";
    case ItemKind::TaskName: return "Task from the generated recipe";
    case ItemKind::Tool: return "Tools of this task in the generated recipe";
    case ItemKind::IngredientList: return "Ingredients of this task in the generated recipe";
  }
  return "";
}

}  // namespace

void validate_taxonomy(const Taxonomy& taxonomy) {
  if (taxonomy.choices.size() < 2) {
    throw ConfigError(std::string(to_string(taxonomy.kind)) + " taxonomy needs at least two choices");
  }
  std::set<std::string> texts;
  for (const auto& c : taxonomy.choices) {
    if (kind_of(c.label) != taxonomy.kind) {
      throw ConfigError("label " + std::string(label_id(c.label)) + " does not belong to " +
                        std::string(to_string(taxonomy.kind)));
    }
    if (c.text.empty() || !texts.insert(c.text).second) {
      throw ConfigError("duplicate or empty choice text '" + c.text + "' in " + std::string(to_string(taxonomy.kind)));
    }
  }
}

TaxonomySet TaxonomySet::defaults(TaskScheme tasks) { return parse(kDefaultTaxonomy, tasks); }

TaxonomySet TaxonomySet::parse(std::string_view json_text, TaskScheme tasks) {
  TaxonomySet set;
  set.task_scheme_ = tasks;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    set.version_ = doc.at("version").get<std::string>();
    for (const auto& [name, entry] : doc.at("kinds").items()) {
      Taxonomy t;
      try {
        t.kind = parse_item_kind(name);
      } catch (const FormatError& e) {
        throw ConfigError(std::string("taxonomy file: ") + e.what());
      }
      t.description = entry.at("description").get<std::string>();
      const char* key = (t.kind == ItemKind::TaskName && tasks == TaskScheme::TwoClass) ? "two_class_choices" : "choices";
      for (const auto& id : entry.at(key)) {
        Label label;
        try {
          label = parse_label(t.kind, id.get<std::string>());
        } catch (const FormatError& e) {
          throw ConfigError(std::string("taxonomy file: ") + e.what());
        }
        if (t.kind == ItemKind::Ingredient && std::get<IngredientLabel>(label) == IngredientLabel::Implied) {
          throw ConfigError("the ingredient judge taxonomy cannot offer Implied");
        }
        if (is_not_filled_in(label)) throw ConfigError("NotFilledIn is assigned by rule, not offered as a choice");
        t.choices.push_back({label, std::string(label_text(label))});
      }
      validate_taxonomy(t);
      set.kinds_[t.kind] = std::move(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("taxonomy file: ") + e.what());
  }
  for (ItemKind k : {ItemKind::Ingredient, ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList}) {
    if (!set.kinds_.count(k)) throw ConfigError("taxonomy file lacks " + std::string(to_string(k)));
  }
  return set;
}

TaxonomySet TaxonomySet::load(const std::string& path, TaskScheme tasks) { return parse(read_file(path), tasks); }

const Taxonomy& TaxonomySet::get(ItemKind kind) const { return kinds_.at(kind); }

JudgeItem make_item(const GeneratedRecipe& recipe, ItemKind kind, int ordinal) {
  JudgeItem item;
  item.key = {recipe.name.text, kind, ordinal};
  item.text = item_text(recipe, kind, ordinal);
  if (kind != ItemKind::Ingredient) item.task_action = task_at(recipe, ordinal).action;
  return item;
}

std::vector<std::string> document_list(const extraction::ExtractedDocument& doc, ItemKind kind) {
  if (kind == ItemKind::Ingredient) return doc.ingredients;
  std::vector<std::string> lines;
  for (const auto& t : doc.tasks) {
    std::string line = t.action;
    std::string tools;
    for (const auto& tool : t.tools) tools += (tools.empty() ? "" : ", ") + tool.name;
    std::string ingredients;
    for (const auto& i : t.ingredients) ingredients += (ingredients.empty() ? "" : ", ") + i;
    line += " (tools: " + (tools.empty() ? std::string("none") : tools) +
            "; ingredients: " + (ingredients.empty() ? std::string("none") : ingredients) + ")";
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<PromptPair> build_choice_prompts(const JudgeItem& item, const extraction::ExtractedDocument& doc,
                                             const Taxonomy& taxonomy) {
  if (!doc.valid) throw PreconditionError("document " + doc.document_id + " failed extraction validation");
  if (item.key.kind != taxonomy.kind) throw PreconditionError("taxonomy does not match the item kind");
  const auto list = document_list(doc, item.key.kind);
  if (list.empty()) throw PreconditionError("document " + doc.document_id + " has an empty list for this item");

  std::string prefix = taxonomy.description;
  prefix += "\n\nRecipe: " + item.key.recipe + "\n";
  if (item.key.kind == ItemKind::Tool || item.key.kind == ItemKind::IngredientList) {
    prefix += "Task from the generated recipe: " + item.task_action + "\n";
  }
  prefix += std::string(item_heading(item.key.kind)) + ": " + item.text + "\n\n";
  prefix += item.key.kind == ItemKind::Ingredient ? "Ingredients of the online recipe:\n" : "Tasks of the online recipe:\n";
  for (const auto& line : list) prefix += "- " + line + "\n";
  prefix += "\nAnswer:";

  std::vector<PromptPair> out;
  for (const auto& c : taxonomy.choices) out.push_back({prefix, " " + c.text});
  return out;
}

std::size_t argmax_choice(const std::vector<double>& scores) {
  if (scores.empty()) throw PreconditionError("no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

JudgeDecision classify(const JudgeItem& item, const extraction::ExtractedDocument& doc, const Taxonomy& taxonomy,
                       const llm::Gateway& gateway, const std::string& model_id, Timestamp at) {
  const auto pairs = build_choice_prompts(item, doc, taxonomy);
  JudgeDecision d;
  for (const auto& p : pairs) d.scores.push_back(gateway.score_continuation({p.prefix, p.continuation, model_id}));
  const std::size_t best = argmax_choice(d.scores);
  std::vector<double> sorted = d.scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  d.margin = sorted[0] - sorted[1];
  d.record = {model_id, item.key.recipe, doc.document_id, item.key.kind, item.key.ordinal,
              taxonomy.choices[best].label, at};
  return d;
}

Json decision_to_json(const JudgeDecision& d, const Taxonomy* taxonomy) {
  Json j = record_to_json(d.record);
  Json scores = Json::object();
  if (taxonomy && !d.scores.empty()) {
    for (std::size_t i = 0; i < d.scores.size() && i < taxonomy->choices.size(); ++i) {
      scores[std::string(label_id(taxonomy->choices[i].label))] = d.scores[i];
    }
  }
  j["scores"] = std::move(scores);
  j["margin"] = d.margin ? Json(*d.margin) : Json(nullptr);
  j["auto_resolved"] = d.auto_resolved;
  return j;
}

JudgeDecision decision_from_json(const Json& j) {
  JudgeDecision d;
  d.record = record_from_json(j);
  if (j.contains("scores") && j["scores"].is_object()) {
    for (const auto& [id, v] : j["scores"].items()) d.scores.push_back(v.get<double>());
  }
  if (j.contains("margin") && j["margin"].is_number()) d.margin = j["margin"].get<double>();
  d.auto_resolved = j.value("auto_resolved", false);
  return d;
}

namespace {

struct DocumentJob {
  std::string model_id;
  const StudyInput* input = nullptr;
  const extraction::ExtractedDocument* doc = nullptr;
  std::vector<JudgeDecision> decisions;
  std::vector<JudgeFailure> failures;
};

void run_job(DocumentJob& job, const TaxonomySet& taxonomies, const llm::Gateway& gateway, const Clock& clock,
             std::atomic<int>& calls) {
  const GeneratedRecipe& recipe = job.input->recipe;
  std::map<int, Label> task_labels;
  for (const ItemKey& key : recipe_items(recipe)) {
    auto auto_resolve = [&](Label label) {
      JudgeDecision d;
      d.record = {job.model_id, key.recipe, job.doc->document_id, key.kind, key.ordinal, label, clock()};
      d.auto_resolved = true;
      job.decisions.push_back(std::move(d));
    };
    if (key.kind == ItemKind::Tool || key.kind == ItemKind::IngredientList) {
      auto it = task_labels.find(key.ordinal);
      if (it != task_labels.end() && blocks_dependents(it->second)) {
        auto_resolve(not_filled_in(key.kind));
        continue;
      }
      if (auto fixed = intrinsic_resolution(recipe, key.kind, key.ordinal)) {
        auto_resolve(*fixed);
        continue;
      }
    }
    const Taxonomy& taxonomy = taxonomies.get(key.kind);
    try {
      calls += static_cast<int>(taxonomy.choices.size());
      auto d = classify(make_item(recipe, key.kind, key.ordinal), *job.doc, taxonomy, gateway, job.model_id, clock());
      if (key.kind == ItemKind::TaskName) task_labels[key.ordinal] = d.record.label;
      job.decisions.push_back(std::move(d));
    } catch (const Error& e) {
      job.failures.push_back({job.model_id, key, job.doc->document_id, e.what()});
    }
  }
}

}  // namespace

JudgeRun judge_study(const std::vector<StudyInput>& inputs, const TaxonomySet& taxonomies,
                     const llm::Gateway& gateway, const JudgeOptions& options) {
  if (options.model_ids.empty()) throw PreconditionError("no judge model configured");
  JudgeRun run;
  std::vector<DocumentJob> jobs;
  for (const auto& input : inputs) {
    for (const auto& doc : input.documents) {
      if (!doc.valid) run.invalid_documents.push_back(input.recipe.name.text + "/" + doc.document_id);
    }
  }
  for (const auto& model : options.model_ids) {
    for (const auto& input : inputs) {
      for (const auto& doc : input.documents) {
        if (doc.valid) jobs.push_back({model, &input, &doc, {}, {}});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> calls{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i], taxonomies, gateway, options.clock, calls);
  };
  const std::size_t workers =
      std::min<std::size_t>(jobs.size(), static_cast<std::size_t>(std::max(1, options.max_parallel_documents)));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& job : jobs) {
    std::move(job.decisions.begin(), job.decisions.end(), std::back_inserter(run.decisions));
    std::move(job.failures.begin(), job.failures.end(), std::back_inserter(run.failures));
  }
  run.scoring_calls = calls.load();
  return run;
}

}  // namespace recipemem::judge
