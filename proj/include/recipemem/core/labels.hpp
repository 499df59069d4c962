#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace recipemem {

enum class ItemKind { Ingredient, TaskName, Tool, IngredientList };

enum class IngredientLabel { Found, FoundNotPerfect, NotFound, Implied };

enum class TaskLabel {
  TaskFound,
  TaskFoundNotExactWording,
  TaskFoundWrongContext,
  TaskNotFound,
};

enum class ToolLabel {
  Found,
  FoundNotExact,
  NotFound,
  ToolImplied,
  NoToolInvolved,
  NotFilledIn,
};

enum class IngredientListLabel {
  IngredientsMatch,
  MostIngredientsMatch,
  SomeIngredientsMatch,
  NoIngredientsMatch,
  IngredientsImplied,
  NoIngredientsUsed,
  NotFilledIn,
};

// One labeling decision. The alternative held always matches the item kind
// it was recorded for (see kind_of).
using Label = std::variant<IngredientLabel, TaskLabel, ToolLabel, IngredientListLabel>;

enum class IngredientScheme { FourClass, ThreeClass };
enum class TaskScheme { FourClass, TwoClass };

std::string_view to_string(ItemKind kind);
ItemKind parse_item_kind(std::string_view text);

ItemKind kind_of(const Label& label);

// Stable identifier used in the record notation ("FoundNotPerfect").
std::string_view label_id(const Label& label);

// Human-facing text as shown to annotators and used as judge choice text
// ("Found (not perfect)").
std::string_view label_text(const Label& label);

// Position of the label inside its enumeration.
std::size_t label_index(const Label& label);

// Closed parse: anything outside the enumeration of `kind` throws FormatError.
Label parse_label(ItemKind kind, std::string_view id);

// Every value of the enumeration belonging to `kind`, in declaration order.
std::vector<Label> all_labels(ItemKind kind);

// ThreeClass folds Implied into NotFound; FourClass is the identity.
IngredientLabel merge_label(IngredientLabel label, IngredientScheme scheme);

// TwoClass folds {Found, Found (not exact wording)} into TaskFound and
// {Wrong context, Not found} into TaskNotFound.
TaskLabel merge_label(TaskLabel label, TaskScheme scheme);

struct MergeScheme {
  IngredientScheme ingredients = IngredientScheme::FourClass;
  TaskScheme tasks = TaskScheme::FourClass;
};

Label merge_label(const Label& label, const MergeScheme& scheme);

// Labels that mark a dependent field skipped by the task-not-found rule.
bool is_not_filled_in(const Label& label);

}  // namespace recipemem
