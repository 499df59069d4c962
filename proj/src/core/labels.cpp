#include "recipemem/core/labels.hpp"

#include "recipemem/core/error.hpp"

namespace recipemem {
namespace {

struct LabelInfo {
  std::string_view id;
  std::string_view text;
};

constexpr std::array<LabelInfo, 4> kIngredientInfo{{
    {"Found", "Found"},
    {"FoundNotPerfect", "Found (not perfect)"},
    {"NotFound", "Not found"},
    {"Implied", "Implied"},
}};

constexpr std::array<LabelInfo, 4> kTaskInfo{{
    {"TaskFound", "Task Found"},
    {"TaskFoundNotExactWording", "Task Found (Not Exact Wording)"},
    {"TaskFoundWrongContext", "Task Found (Wrong Context)"},
    {"TaskNotFound", "Task Not Found"},
}};

constexpr std::array<LabelInfo, 6> kToolInfo{{
    {"Found", "Found"},
    {"FoundNotExact", "Found (Not Exact)"},
    {"NotFound", "Not Found"},
    {"ToolImplied", "Tool Implied"},
    {"NoToolInvolved", "No Tool Involved"},
    {"NotFilledIn", "Not filled in"},
}};

constexpr std::array<LabelInfo, 7> kIngredientListInfo{{
    {"IngredientsMatch", "Ingredients Match"},
    {"MostIngredientsMatch", "Most Ingredients Match"},
    {"SomeIngredientsMatch", "Some Ingredients Match"},
    {"NoIngredientsMatch", "No Ingredients Match"},
    {"IngredientsImplied", "Ingredients Implied"},
    {"NoIngredientsUsed", "No Ingredients Used"},
    {"NotFilledIn", "Not filled in"},
}};

const LabelInfo& info_of(const Label& label) {
  return std::visit(
      [](auto value) -> const LabelInfo& {
        using E = decltype(value);
        const auto i = static_cast<std::size_t>(value);
        if constexpr (std::is_same_v<E, IngredientLabel>) return kIngredientInfo.at(i);
        if constexpr (std::is_same_v<E, TaskLabel>) return kTaskInfo.at(i);
        if constexpr (std::is_same_v<E, ToolLabel>) return kToolInfo.at(i);
        if constexpr (std::is_same_v<E, IngredientListLabel>) return kIngredientListInfo.at(i);
      },
      label);
}

template <typename E, std::size_t N>
std::vector<Label> enumerate(const std::array<LabelInfo, N>&) {
  std::vector<Label> out;
  out.reserve(N);
  for (std::size_t i = 0; i < N; ++i) out.emplace_back(static_cast<E>(i));
  return out;
}

template <typename E, std::size_t N>
Label parse_in(const std::array<LabelInfo, N>& table, ItemKind kind, std::string_view id) {
  for (std::size_t i = 0; i < N; ++i) {
    if (table[i].id == id) return static_cast<E>(i);
  }
  throw FormatError("unknown " + std::string(to_string(kind)) + " label '" + std::string(id) + "'");
}

}  // namespace

std::string_view to_string(ItemKind kind) {
  switch (kind) {
    case ItemKind::Ingredient: return "Ingredient";
    case ItemKind::TaskName: return "TaskName";
    case ItemKind::Tool: return "Tool";
    case ItemKind::IngredientList: return "IngredientList";
  }
  return "?";
}

ItemKind parse_item_kind(std::string_view text) {
  for (auto kind : {ItemKind::Ingredient, ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList}) {
    if (to_string(kind) == text) return kind;
  }
  throw FormatError("unknown item kind '" + std::string(text) + "'");
}

ItemKind kind_of(const Label& label) {
  switch (label.index()) {
    case 0: return ItemKind::Ingredient;
    case 1: return ItemKind::TaskName;
    case 2: return ItemKind::Tool;
    default: return ItemKind::IngredientList;
  }
}

std::string_view label_id(const Label& label) { return info_of(label).id; }

std::string_view label_text(const Label& label) { return info_of(label).text; }

std::size_t label_index(const Label& label) {
  return std::visit([](auto value) { return static_cast<std::size_t>(value); }, label);
}

Label parse_label(ItemKind kind, std::string_view id) {
  switch (kind) {
    case ItemKind::Ingredient: return parse_in<IngredientLabel>(kIngredientInfo, kind, id);
    case ItemKind::TaskName: return parse_in<TaskLabel>(kTaskInfo, kind, id);
    case ItemKind::Tool: return parse_in<ToolLabel>(kToolInfo, kind, id);
    case ItemKind::IngredientList:
      return parse_in<IngredientListLabel>(kIngredientListInfo, kind, id);
  }
  throw FormatError("unknown item kind");
}

std::vector<Label> all_labels(ItemKind kind) {
  switch (kind) {
    case ItemKind::Ingredient: return enumerate<IngredientLabel>(kIngredientInfo);
    case ItemKind::TaskName: return enumerate<TaskLabel>(kTaskInfo);
    case ItemKind::Tool: return enumerate<ToolLabel>(kToolInfo);
    case ItemKind::IngredientList: return enumerate<IngredientListLabel>(kIngredientListInfo);
  }
  return {};
}

IngredientLabel merge_label(IngredientLabel label, IngredientScheme scheme) {
  if (scheme == IngredientScheme::ThreeClass && label == IngredientLabel::Implied) {
    return IngredientLabel::NotFound;
  }
  return label;
}

TaskLabel merge_label(TaskLabel label, TaskScheme scheme) {
  if (scheme == TaskScheme::FourClass) return label;
  switch (label) {
    case TaskLabel::TaskFound:
    case TaskLabel::TaskFoundNotExactWording:
      return TaskLabel::TaskFound;
    case TaskLabel::TaskFoundWrongContext:
    case TaskLabel::TaskNotFound:
      return TaskLabel::TaskNotFound;
  }
  return label;
}

Label merge_label(const Label& label, const MergeScheme& scheme) {
  if (const auto* ing = std::get_if<IngredientLabel>(&label)) return merge_label(*ing, scheme.ingredients);
  if (const auto* task = std::get_if<TaskLabel>(&label)) return merge_label(*task, scheme.tasks);
  return label;
}

bool is_not_filled_in(const Label& label) {
  if (const auto* tool = std::get_if<ToolLabel>(&label)) return *tool == ToolLabel::NotFilledIn;
  if (const auto* list = std::get_if<IngredientListLabel>(&label)) {
    return *list == IngredientListLabel::NotFilledIn;
  }
  return false;
}

}  // namespace recipemem
