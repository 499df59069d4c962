#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "recipemem/annotation/assignments.hpp"
#include "recipemem/core/records.hpp"
#include "recipemem/core/time.hpp"
#include "recipemem/core/types.hpp"

namespace recipemem::annotation {

// Append-only JSON Lines log. The last line for a key is the effective record.
class RecordStore {
 public:
  // Loads an existing log; an empty path keeps records in memory only.
  explicit RecordStore(std::string path = {});

  void append(const AnnotationRecord& record);
  std::optional<AnnotationRecord> find(const RecordKey& key) const;
  const std::vector<AnnotationRecord>& history() const { return history_; }
  std::vector<AnnotationRecord> effective() const;

 private:
  std::string path_;
  std::vector<AnnotationRecord> history_;
  std::map<RecordKey, std::size_t> latest_;
};

struct DocumentRef {
  std::string document_id;
  std::string url;
};

struct StudyUniverse {
  std::string study_id;
  std::vector<GeneratedRecipe> recipes;
  std::map<std::string, std::vector<DocumentRef>> documents;  // by recipe
  std::vector<Assignment> assignments;
};

struct PendingItem {
  std::string annotator;
  std::string recipe;
  std::string document_id;
  std::string document_url;
  ItemKind item_kind = ItemKind::Ingredient;
  int item_ordinal = 0;
  std::string item_text;
  std::string task_action;
  std::vector<Label> allowed_labels;
};

Json pending_to_json(const PendingItem& item, const GeneratedRecipe& recipe);

// Labels a human may pick for the kind: the whole enumeration except NotFilledIn.
std::vector<Label> human_choices(ItemKind kind);

struct Progress {
  int total = 0;
  int recorded = 0;
  int auto_resolved = 0;
  int pending = 0;
};

enum class RecordStatus { Stored, Conflict, Invalid };

struct RecordOutcome {
  RecordStatus status = RecordStatus::Invalid;
  std::optional<AnnotationRecord> record;  // stored record, or the existing one on conflict
  std::string message;
};

// Serves the queue of pending items and accepts records. Thread-safe.
class AnnotationService {
 public:
  AnnotationService(StudyUniverse universe, std::string store_path, Clock clock = system_clock());

  const std::string& study_id() const { return universe_.study_id; }
  bool has_annotator(const std::string& annotator) const;

  std::optional<PendingItem> next_pending(const std::string& annotator) const;
  std::optional<Json> next_pending_json(const std::string& annotator) const;

  // A missing timestamp (epoch zero) is filled with the service clock.
  RecordOutcome record(AnnotationRecord record);

  // Effective records plus the NotFilledIn fields resolved by rule (once the
  // triple's task name is recorded), in canonical order.
  std::vector<AnnotationRecord> export_records() const;
  std::string export_text() const;

  Progress progress(const std::string& annotator) const;

 private:
  enum class State { Pending, Recorded, AutoResolved };

  const GeneratedRecipe* recipe(const std::string& name) const;
  const Assignment* assignment(const std::string& annotator, const std::string& recipe) const;
  State state_of(const std::string& annotator, const std::string& document_id, const GeneratedRecipe& recipe,
                 const ItemKey& item) const;
  bool session_open(const std::string& annotator, const std::string& recipe, const std::string& document_id) const;
  std::vector<AnnotationRecord> export_locked() const;

  StudyUniverse universe_;
  RecordStore store_;
  Clock clock_;
  mutable std::mutex mu_;
};

}  // namespace recipemem::annotation
