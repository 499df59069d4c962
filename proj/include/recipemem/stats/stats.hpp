#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recipemem/core/types.hpp"

namespace recipemem::generation {
struct ScreenVerdict;
}

namespace recipemem::stats {

// Item kinds analysed together. The task family pools task names, tools and
// ingredient lists into one sequence per annotator pair.
enum class Family { Ingredients, Tasks };

std::string_view to_string(Family family);
const std::vector<ItemKind>& family_kinds(Family family);

// Last record per (annotator, recipe, document, item) wins.
std::vector<AnnotationRecord> effective_records(const std::vector<AnnotationRecord>& records);

// Unweighted; p_e = 1 can only occur with full agreement and then yields 1.
double cohens_kappa(const std::vector<Label>& a, const std::vector<Label>& b);

struct PairScore {
  std::string recipe;
  std::string annotator_a;  // a < b
  std::string annotator_b;
  std::size_t shared = 0;
  std::size_t same = 0;
  double kappa = 0.0;
  friend bool operator==(const PairScore&, const PairScore&) = default;
};

// Every (recipe, annotator pair) sharing at least one item of `kinds`,
// ordered by (recipe, a, b). Labels are compared after `scheme`.
std::vector<PairScore> pair_scores(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                                   const MergeScheme& scheme = {});

struct AgreementReport {
  std::vector<PairScore> pairs;
  double macro_kappa = 0.0;
  std::size_t pair_count() const { return pairs.size(); }
};

AgreementReport macro_kappa(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                            const MergeScheme& scheme = {});

struct RecipeRatio {
  std::string recipe;
  std::size_t same = 0;
  std::size_t total = 0;
  double ratio() const { return static_cast<double>(same) / static_cast<double>(total); }
  friend bool operator==(const RecipeRatio&, const RecipeRatio&) = default;
};

enum class AccuracyKind { HumanMacro, ModelMacro };

struct PairAccuracy {
  std::string annotator_a;
  std::string annotator_b;
  std::vector<RecipeRatio> recipes;
  double value = 0.0;
};

struct AccuracyReport {
  AccuracyKind kind = AccuracyKind::HumanMacro;
  std::string model;                  // ModelMacro only
  std::vector<PairAccuracy> pairs;    // HumanMacro only
  std::vector<RecipeRatio> recipes;   // ModelMacro only
  std::size_t unmatched = 0;          // human items the model has no record for
  double value = 0.0;
};

// A_h: mean over annotator pairs of the mean over recipes of S_ij / T_ij.
AccuracyReport human_macro_accuracy(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                                    const MergeScheme& scheme = {});

// A_m for a single model. An item annotated by several humans counts once in
// T_i and counts in S_i when the model agrees with any of them.
AccuracyReport model_accuracy(const std::vector<AnnotationRecord>& model_records,
                              const std::vector<AnnotationRecord>& human_records, const std::vector<ItemKind>& kinds,
                              const MergeScheme& scheme = {});

// Two-decimal half-up rounding as printed in the selection tables.
double round_percentage(std::size_t count, std::size_t total);

struct SelectionRow {
  Label label;
  std::size_t count = 0;
  double percentage = 0.0;
};

struct SelectionSummary {
  ItemKind kind = ItemKind::Ingredient;
  std::vector<SelectionRow> rows;  // every label of the kind; empty when total is 0
  std::size_t total = 0;
};

SelectionSummary selection_summary(const std::vector<AnnotationRecord>& records, ItemKind kind);

struct LabelCount {
  Label label;
  std::size_t count = 0;
  friend bool operator==(const LabelCount&, const LabelCount&) = default;
};

struct NeverFound {
  ItemKey item;
  std::vector<LabelCount> counts;  // all labels of the kind, declaration order
  std::size_t count_of(const Label& label) const;
};

// Items never given `top_label` by anyone on any document, ordered by item.
std::vector<NeverFound> never_found_items(const std::vector<AnnotationRecord>& records, ItemKind kind,
                                          const Label& top_label);

struct FoundPredicate {
  std::string name;
  std::vector<Label> labels;
  bool contains(const Label& label) const;
};

// Only the top label of the kind.
FoundPredicate strict_predicate(ItemKind kind);
// Ingredients {Found, FoundNotPerfect}; tasks {TaskFound, TaskFoundNotExactWording};
// tools {Found, FoundNotExact, ToolImplied}; lists {IngredientsMatch, MostIngredientsMatch}.
FoundPredicate broad_predicate(ItemKind kind);

struct SamplingMode {
  enum class Kind { Exact, Sampled };
  Kind kind = Kind::Exact;
  int count = 1000;  // subsets per (recipe, n) when sampling
  std::uint64_t seed = 0;
  static SamplingMode exact() { return {}; }
  static SamplingMode sampled(int count, std::uint64_t seed) { return {Kind::Sampled, count, seed}; }
};

struct SaturationPoint {
  int n = 0;
  double percentage = 0.0;
  friend bool operator==(const SaturationPoint&, const SaturationPoint&) = default;
};

struct SaturationCurve {
  ItemKind kind = ItemKind::Ingredient;
  FoundPredicate predicate;
  SamplingMode mode;
  std::vector<SaturationPoint> points;  // n = 1 .. largest document count
};

struct MissingCell {
  ItemKey item;
  std::string document_id;
  friend auto operator<=>(const MissingCell&, const MissingCell&) = default;
};

// (item, document) pairs of `kind` lacking any record, per recipe. The item and
// document universes of a recipe are those appearing in its records.
std::vector<MissingCell> missing_coverage(const std::vector<AnnotationRecord>& records, ItemKind kind);

// Throws PreconditionError listing the missing cells when coverage is incomplete.
// Several records for one cell (several annotators) count as found when any is.
// A recipe with fewer than n documents contributes the coverage of all of them.
SaturationCurve saturation_curve(const std::vector<AnnotationRecord>& records, ItemKind kind,
                                 const FoundPredicate& predicate, const SamplingMode& mode = {});

enum class CreativityStatus { Creative, Found, Nonsense };

std::string_view to_string(CreativityStatus status);

struct CreativityEntry {
  ItemKey item;
  CreativityStatus status = CreativityStatus::Creative;
  std::size_t documents = 0;
  std::vector<std::string> found_in;  // documents carrying a found label
  std::vector<LabelCount> counts;
};

// Items of `kinds` flagged by the screening notes of their recipe: a note that
// mentions the ingredient name or task action.
std::set<ItemKey> flagged_items(const GeneratedRecipe& recipe, const generation::ScreenVerdict& verdict);

// One entry per assessable item (fields that are NotFilledIn everywhere are
// skipped), ordered by item. Found uses the broad predicate of the kind.
std::vector<CreativityEntry> creativity_report(const std::vector<AnnotationRecord>& judge_records,
                                               const std::vector<ItemKind>& kinds,
                                               const std::set<ItemKey>& nonsense_items);

}  // namespace recipemem::stats
