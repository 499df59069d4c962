#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/labels.hpp"
#include "recipemem/core/time.hpp"

namespace recipemem {

struct RecipeName {
  std::string text;
  std::optional<std::string> origin_tag;

  friend bool operator==(const RecipeName&, const RecipeName&) = default;
};

struct IngredientMention {
  std::string name;
  int ordinal = 0;

  friend bool operator==(const IngredientMention&, const IngredientMention&) = default;
};

struct Tool {
  std::string name;
  // true when the tool was carried over from an earlier triple of the same chain
  bool propagated = false;

  friend bool operator==(const Tool&, const Tool&) = default;
};

// (task name, tools, involved ingredients) for one performed action.
struct TaskTriple {
  std::string action;
  std::vector<Tool> tools;
  std::vector<std::string> ingredients;
  int ordinal = 0;

  friend bool operator==(const TaskTriple&, const TaskTriple&) = default;
};

struct GeneratedRecipe {
  RecipeName name;
  std::string raw_text;
  std::vector<IngredientMention> ingredients;
  std::vector<TaskTriple> tasks;
  std::string generator_id;
  int prompt_type = 2;
  int variant = 1;

  friend bool operator==(const GeneratedRecipe&, const GeneratedRecipe&) = default;
};

// Identity of an annotated item: never its text, so renames cannot remap labels.
struct ItemKey {
  std::string recipe;
  ItemKind kind = ItemKind::Ingredient;
  int ordinal = 0;

  friend auto operator<=>(const ItemKey&, const ItemKey&) = default;
};

struct AnnotationRecord {
  std::string annotator;
  std::string recipe;
  std::string document_id;
  ItemKind item_kind = ItemKind::Ingredient;
  int item_ordinal = 0;
  Label label = IngredientLabel::Found;
  Timestamp timestamp{};

  ItemKey item() const { return {recipe, item_kind, item_ordinal}; }
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

// (annotator, recipe, document_id, item_kind, item_ordinal)
struct RecordKey {
  std::string annotator;
  std::string recipe;
  std::string document_id;
  ItemKind item_kind = ItemKind::Ingredient;
  int item_ordinal = 0;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

inline RecordKey key_of(const AnnotationRecord& r) {
  return {r.annotator, r.recipe, r.document_id, r.item_kind, r.item_ordinal};
}

}  // namespace recipemem
