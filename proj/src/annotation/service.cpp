#include "recipemem/annotation/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "recipemem/core/error.hpp"
#include "recipemem/core/items.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::annotation {

RecordStore::RecordStore(std::string path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  for (auto& r : read_records_file(path_)) {
    latest_[key_of(r)] = history_.size();
    history_.push_back(std::move(r));
  }
}

void RecordStore::append(const AnnotationRecord& record) {
  if (!path_.empty()) {
    const auto parent = std::filesystem::path(path_).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << to_line(record) << '\n';
    out.flush();
    if (!out) throw Error("cannot append to " + path_);
  }
  latest_[key_of(record)] = history_.size();
  history_.push_back(record);
}

std::optional<AnnotationRecord> RecordStore::find(const RecordKey& key) const {
  auto it = latest_.find(key);
  if (it == latest_.end()) return std::nullopt;
  return history_[it->second];
}

std::vector<AnnotationRecord> RecordStore::effective() const {
  std::vector<AnnotationRecord> out;
  out.reserve(latest_.size());
  for (const auto& [key, index] : latest_) out.push_back(history_[index]);
  return out;
}

std::vector<Label> human_choices(ItemKind kind) {
  std::vector<Label> out;
  for (const auto& l : all_labels(kind)) {
    if (!is_not_filled_in(l)) out.push_back(l);
  }
  return out;
}

Json pending_to_json(const PendingItem& item, const GeneratedRecipe& recipe) {
  Json j;
  j["annotator"] = item.annotator;
  j["recipe"] = item.recipe;
  j["document_id"] = item.document_id;
  j["document_url"] = item.document_url;
  j["item_kind"] = std::string(to_string(item.item_kind));
  j["item_ordinal"] = item.item_ordinal;
  j["item_text"] = item.item_text;
  j["task_action"] = item.task_action;
  Json labels = Json::array();
  for (const auto& l : item.allowed_labels) {
    labels.push_back({{"id", std::string(label_id(l))}, {"text", std::string(label_text(l))}});
  }
  j["allowed_labels"] = std::move(labels);
  Json ingredients = Json::array();
  for (const auto& m : recipe.ingredients) ingredients.push_back(m.name);
  j["recipe_ingredients"] = std::move(ingredients);
  Json tasks = Json::array();
  for (const auto& t : recipe.tasks) tasks.push_back(task_to_json(t));
  j["recipe_tasks"] = std::move(tasks);
  return j;
}

AnnotationService::AnnotationService(StudyUniverse universe, std::string store_path, Clock clock)
    : universe_(std::move(universe)), store_(std::move(store_path)), clock_(std::move(clock)) {}

const GeneratedRecipe* AnnotationService::recipe(const std::string& name) const {
  for (const auto& r : universe_.recipes) {
    if (r.name.text == name) return &r;
  }
  return nullptr;
}

const Assignment* AnnotationService::assignment(const std::string& annotator, const std::string& recipe) const {
  for (const auto& a : universe_.assignments) {
    if (a.annotator == annotator && a.recipe == recipe) return &a;
  }
  return nullptr;
}

bool AnnotationService::has_annotator(const std::string& annotator) const {
  return std::any_of(universe_.assignments.begin(), universe_.assignments.end(),
                     [&](const Assignment& a) { return a.annotator == annotator; });
}

AnnotationService::State AnnotationService::state_of(const std::string& annotator, const std::string& document_id,
                                                     const GeneratedRecipe& r, const ItemKey& item) const {
  if (store_.find({annotator, r.name.text, document_id, item.kind, item.ordinal})) return State::Recorded;
  if (item.kind == ItemKind::Tool || item.kind == ItemKind::IngredientList) {
    if (intrinsic_resolution(r, item.kind, item.ordinal)) return State::AutoResolved;
    const auto task = store_.find({annotator, r.name.text, document_id, ItemKind::TaskName, item.ordinal});
    if (task && blocks_dependents(task->label)) return State::AutoResolved;
  }
  return State::Pending;
}

bool AnnotationService::session_open(const std::string& annotator, const std::string& recipe,
                                     const std::string& document_id) const {
  const auto& h = store_.history();
  for (auto it = h.rbegin(); it != h.rend(); ++it) {
    if (it->annotator == annotator) return it->recipe == recipe && it->document_id == document_id;
  }
  return false;
}

std::optional<PendingItem> AnnotationService::next_pending(const std::string& annotator) const {
  std::lock_guard lock(mu_);
  for (const auto& r : universe_.recipes) {
    const Assignment* a = assignment(annotator, r.name.text);
    if (!a) continue;
    for (const auto& doc : a->document_ids) {
      for (const auto& item : recipe_items(r)) {
        if (state_of(annotator, doc, r, item) != State::Pending) continue;
        PendingItem p;
        p.annotator = annotator;
        p.recipe = r.name.text;
        p.document_id = doc;
        for (const auto& ref : universe_.documents.count(r.name.text) ? universe_.documents.at(r.name.text)
                                                                        : std::vector<DocumentRef>{}) {
          if (ref.document_id == doc) p.document_url = ref.url;
        }
        p.item_kind = item.kind;
        p.item_ordinal = item.ordinal;
        p.item_text = item_text(r, item.kind, item.ordinal);
        if (item.kind != ItemKind::Ingredient) p.task_action = task_at(r, item.ordinal).action;
        p.allowed_labels = human_choices(item.kind);
        return p;
      }
    }
  }
  return std::nullopt;
}

std::optional<Json> AnnotationService::next_pending_json(const std::string& annotator) const {
  auto p = next_pending(annotator);
  if (!p) return std::nullopt;
  return pending_to_json(*p, *recipe(p->recipe));
}

RecordOutcome AnnotationService::record(AnnotationRecord rec) {
  std::lock_guard lock(mu_);
  auto invalid = [](std::string message) { return RecordOutcome{RecordStatus::Invalid, std::nullopt, std::move(message)}; };
  const GeneratedRecipe* r = recipe(rec.recipe);
  if (!r) return invalid("unknown recipe '" + rec.recipe + "'");
  const Assignment* a = assignment(rec.annotator, rec.recipe);
  if (!a || std::find(a->document_ids.begin(), a->document_ids.end(), rec.document_id) == a->document_ids.end()) {
    return invalid("document " + rec.document_id + " is not assigned to " + rec.annotator);
  }
  try {
    item_text(*r, rec.item_kind, rec.item_ordinal);
  } catch (const PreconditionError& e) {
    return invalid(e.what());
  }
  if (kind_of(rec.label) != rec.item_kind) return invalid("label does not belong to the item kind");
  if (is_not_filled_in(rec.label)) return invalid("NotFilledIn is assigned automatically");

  const RecordKey key = key_of(rec);
  if (auto existing = store_.find(key)) {
    const auto* before = std::get_if<IngredientLabel>(&existing->label);
    const auto* after = std::get_if<IngredientLabel>(&rec.label);
    const bool upgrade = before && after && *before == IngredientLabel::NotFound && *after == IngredientLabel::Implied;
    if (!upgrade || !session_open(rec.annotator, rec.recipe, rec.document_id)) {
      return {RecordStatus::Conflict, *existing, "already recorded"};
    }
  } else {
    const ItemKey item{rec.recipe, rec.item_kind, rec.item_ordinal};
    if (state_of(rec.annotator, rec.document_id, *r, item) == State::AutoResolved) {
      return invalid("this field is resolved automatically");
    }
    if ((rec.item_kind == ItemKind::Tool || rec.item_kind == ItemKind::IngredientList) &&
        !store_.find({rec.annotator, rec.recipe, rec.document_id, ItemKind::TaskName, rec.item_ordinal})) {
      return invalid("record the task name of this triple first");
    }
  }
  if (rec.timestamp == Timestamp{}) rec.timestamp = clock_();
  store_.append(rec);
  return {RecordStatus::Stored, rec, "stored"};
}

std::vector<AnnotationRecord> AnnotationService::export_locked() const {
  std::vector<AnnotationRecord> out = store_.effective();
  for (const auto& a : universe_.assignments) {
    const GeneratedRecipe* r = recipe(a.recipe);
    if (!r) continue;
    for (const auto& doc : a.document_ids) {
      for (const auto& t : r->tasks) {
        const auto task = store_.find({a.annotator, a.recipe, doc, ItemKind::TaskName, t.ordinal});
        if (!task) continue;
        for (ItemKind kind : {ItemKind::Tool, ItemKind::IngredientList}) {
          if (state_of(a.annotator, doc, *r, {a.recipe, kind, t.ordinal}) != State::AutoResolved) continue;
          out.push_back({a.annotator, a.recipe, doc, kind, t.ordinal, not_filled_in(kind), task->timestamp});
        }
      }
    }
  }
  sort_canonical(out);
  return out;
}

std::vector<AnnotationRecord> AnnotationService::export_records() const {
  std::lock_guard lock(mu_);
  return export_locked();
}

std::string AnnotationService::export_text() const {
  std::ostringstream os;
  write_records(os, export_records());
  return os.str();
}

Progress AnnotationService::progress(const std::string& annotator) const {
  std::lock_guard lock(mu_);
  Progress p;
  for (const auto& r : universe_.recipes) {
    const Assignment* a = assignment(annotator, r.name.text);
    if (!a) continue;
    for (const auto& doc : a->document_ids) {
      for (const auto& item : recipe_items(r)) {
        ++p.total;
        switch (state_of(annotator, doc, r, item)) {
          case State::Recorded: ++p.recorded; break;
          case State::AutoResolved: ++p.auto_resolved; break;
          case State::Pending: ++p.pending; break;
        }
      }
    }
  }
  return p;
}

}  // namespace recipemem::annotation
