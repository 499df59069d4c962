#include "recipemem/core/validation.hpp"

#include <algorithm>
#include <set>

#include "recipemem/core/text.hpp"

namespace recipemem {
namespace {

void check_ordinals(std::vector<int> ordinals, const std::string& what, std::vector<Violation>& out) {
  std::sort(ordinals.begin(), ordinals.end());
  int expected = 0;
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    const int o = ordinals[i];
    if (i > 0 && o == ordinals[i - 1]) {
      out.push_back({"duplicate_" + what + "_ordinal", "duplicate " + what + " ordinal " + std::to_string(o), o});
      continue;
    }
    if (o != expected) {
      out.push_back({"noncontiguous_" + what + "_ordinal",
                     what + " ordinals skip from " + std::to_string(expected) + " to " + std::to_string(o), o});
    }
    expected = o + 1;
  }
}

}  // namespace

std::vector<Violation> validate_recipe(const GeneratedRecipe& recipe) {
  std::vector<Violation> out;
  if (trim(recipe.name.text).empty()) out.push_back({"empty_name", "recipe name is empty", std::nullopt});
  if (recipe.prompt_type < 1 || recipe.prompt_type > 5) {
    out.push_back({"prompt_type", "prompt type must be in 1..5", std::nullopt});
  }
  if (recipe.variant < 1) out.push_back({"variant", "variant index must be >= 1", std::nullopt});
  if (recipe.ingredients.empty()) out.push_back({"no_ingredients", "recipe has no ingredients", std::nullopt});
  if (recipe.tasks.empty()) out.push_back({"no_tasks", "recipe has no tasks", std::nullopt});

  std::vector<int> ordinals;
  for (const auto& m : recipe.ingredients) {
    ordinals.push_back(m.ordinal);
    if (trim(m.name).empty()) {
      out.push_back({"empty_ingredient", "ingredient " + std::to_string(m.ordinal) + " has no name", m.ordinal});
    }
  }
  check_ordinals(std::move(ordinals), "ingredient", out);

  ordinals.clear();
  for (const auto& t : recipe.tasks) {
    ordinals.push_back(t.ordinal);
    if (trim(t.action).empty()) {
      out.push_back({"empty_action", "task " + std::to_string(t.ordinal) + " has no action", t.ordinal});
    }
  }
  check_ordinals(std::move(ordinals), "task", out);

  // A propagated tool needs a source: the same tool string in an earlier triple.
  std::vector<const TaskTriple*> by_ordinal;
  for (const auto& t : recipe.tasks) by_ordinal.push_back(&t);
  std::stable_sort(by_ordinal.begin(), by_ordinal.end(),
                   [](const TaskTriple* a, const TaskTriple* b) { return a->ordinal < b->ordinal; });
  std::set<std::string> seen_tools;
  for (const TaskTriple* t : by_ordinal) {
    for (const auto& tool : t->tools) {
      if (tool.propagated && !seen_tools.count(tool.name)) {
        out.push_back({"unsourced_propagated_tool",
                       "task " + std::to_string(t->ordinal) + " carries propagated tool '" + tool.name +
                           "' that no earlier task mentions",
                       t->ordinal});
      }
    }
    for (const auto& tool : t->tools) seen_tools.insert(tool.name);
  }
  return out;
}

}  // namespace recipemem
