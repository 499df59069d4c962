#include "recipemem/core/items.hpp"

#include "recipemem/core/error.hpp"

namespace recipemem {

std::vector<ItemKey> recipe_items(const GeneratedRecipe& recipe) {
  std::vector<ItemKey> out;
  for (const auto& m : recipe.ingredients) out.push_back({recipe.name.text, ItemKind::Ingredient, m.ordinal});
  for (const auto& t : recipe.tasks) {
    out.push_back({recipe.name.text, ItemKind::TaskName, t.ordinal});
    out.push_back({recipe.name.text, ItemKind::Tool, t.ordinal});
    out.push_back({recipe.name.text, ItemKind::IngredientList, t.ordinal});
  }
  return out;
}

const TaskTriple& task_at(const GeneratedRecipe& recipe, int ordinal) {
  for (const auto& t : recipe.tasks) {
    if (t.ordinal == ordinal) return t;
  }
  throw PreconditionError("recipe '" + recipe.name.text + "' has no task " + std::to_string(ordinal));
}

std::string item_text(const GeneratedRecipe& recipe, ItemKind kind, int ordinal) {
  if (kind == ItemKind::Ingredient) {
    for (const auto& m : recipe.ingredients) {
      if (m.ordinal == ordinal) return m.name;
    }
    throw PreconditionError("recipe '" + recipe.name.text + "' has no ingredient " + std::to_string(ordinal));
  }
  const TaskTriple& t = task_at(recipe, ordinal);
  std::string out;
  switch (kind) {
    case ItemKind::TaskName:
      return t.action;
    case ItemKind::Tool:
      for (const auto& tool : t.tools) out += (out.empty() ? "" : ", ") + tool.name;
      return out;
    case ItemKind::IngredientList:
      for (const auto& i : t.ingredients) out += (out.empty() ? "" : ", ") + i;
      return out;
    default:
      return out;
  }
}

std::optional<Label> intrinsic_resolution(const GeneratedRecipe& recipe, ItemKind kind, int ordinal) {
  if (kind == ItemKind::Tool && task_at(recipe, ordinal).tools.empty()) return ToolLabel::NotFilledIn;
  if (kind == ItemKind::IngredientList && task_at(recipe, ordinal).ingredients.empty()) {
    return IngredientListLabel::NotFilledIn;
  }
  return std::nullopt;
}

bool blocks_dependents(const Label& task_label) {
  const auto* t = std::get_if<TaskLabel>(&task_label);
  return t && *t == TaskLabel::TaskNotFound;
}

Label not_filled_in(ItemKind kind) {
  if (kind == ItemKind::Tool) return ToolLabel::NotFilledIn;
  if (kind == ItemKind::IngredientList) return IngredientListLabel::NotFilledIn;
  throw PreconditionError("only tool and ingredient-list fields can be left unfilled");
}

}  // namespace recipemem
