#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/labels.hpp"
#include "recipemem/core/types.hpp"

namespace recipemem {

// Items of a recipe in annotation order: every ingredient, then for each task
// its name, tool and ingredient-list fields.
std::vector<ItemKey> recipe_items(const GeneratedRecipe& recipe);

// What an annotator sees for the item: the ingredient name, the task action,
// the triple's tools or its ingredients (comma separated).
std::string item_text(const GeneratedRecipe& recipe, ItemKind kind, int ordinal);

const TaskTriple& task_at(const GeneratedRecipe& recipe, int ordinal);

// A dependent field with nothing in it (a triple without tools or without
// ingredients) is NotFilledIn regardless of the document.
std::optional<Label> intrinsic_resolution(const GeneratedRecipe& recipe, ItemKind kind, int ordinal);

// True when the task-name label means the triple's tool and ingredient-list
// fields are not annotated.
bool blocks_dependents(const Label& task_label);

Label not_filled_in(ItemKind kind);

}  // namespace recipemem
