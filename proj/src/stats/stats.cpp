#include "recipemem/stats/stats.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"
#include "recipemem/generation/screening.hpp"

namespace recipemem::stats {

namespace {

// (document, kind, ordinal) inside one recipe
using Cell = std::tuple<std::string, ItemKind, int>;

bool wanted(const std::vector<ItemKind>& kinds, ItemKind kind) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

std::vector<AnnotationRecord> filtered(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds) {
  std::vector<AnnotationRecord> out;
  for (auto& r : effective_records(records)) {
    if (wanted(kinds, r.item_kind)) out.push_back(std::move(r));
  }
  return out;
}

double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Fraction of size-n subsets of N documents containing at least one of f found ones.
double exact_cover_fraction(int documents, int found, int n) {
  double miss = 1.0;
  for (int k = 0; k < n; ++k) {
    const int num = documents - found - k;
    if (num <= 0) return 1.0;
    miss *= static_cast<double>(num) / static_cast<double>(documents - k);
  }
  return 1.0 - miss;
}

double subset_count(int documents, int n) {
  double c = 1.0;
  for (int k = 0; k < n; ++k) c = c * (documents - k) / (k + 1);
  return c;
}

bool contains_word(std::string_view haystack, std::string_view needle) {
  const std::string h = to_lower(haystack);
  const std::string n = to_lower(trim(needle));
  if (n.empty()) return false;
  const auto boundary = [&](std::size_t i) {
    return i >= h.size() || !std::isalnum(static_cast<unsigned char>(h[i]));
  };
  for (std::size_t at = h.find(n); at != std::string::npos; at = h.find(n, at + 1)) {
    if ((at == 0 || boundary(at - 1)) && boundary(at + n.size())) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Family family) { return family == Family::Ingredients ? "ingredients" : "tasks"; }

const std::vector<ItemKind>& family_kinds(Family family) {
  static const std::vector<ItemKind> ingredients{ItemKind::Ingredient};
  static const std::vector<ItemKind> tasks{ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList};
  return family == Family::Ingredients ? ingredients : tasks;
}

std::vector<AnnotationRecord> effective_records(const std::vector<AnnotationRecord>& records) {
  std::map<RecordKey, AnnotationRecord> last;
  for (const auto& r : records) last.insert_or_assign(key_of(r), r);
  std::vector<AnnotationRecord> out;
  out.reserve(last.size());
  for (auto& [key, r] : last) out.push_back(std::move(r));
  return out;
}

double cohens_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.empty()) throw PreconditionError("cohens_kappa: empty label sequences");
  if (a.size() != b.size()) {
    throw PreconditionError("cohens_kappa: length mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  std::map<Label, std::size_t> ca, cb;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    agree += a[i] == b[i];
  }
  if (ca.size() == 1 && cb.size() == 1 && ca.begin()->first == cb.begin()->first) return 1.0;
  const double n = static_cast<double>(a.size());
  double expected = 0.0;
  for (const auto& [label, count] : ca) {
    const auto other = cb.find(label);
    if (other != cb.end()) expected += static_cast<double>(count) * static_cast<double>(other->second);
  }
  const double p_o = static_cast<double>(agree) / n;
  const double p_e = expected / (n * n);
  return (p_o - p_e) / (1.0 - p_e);
}

std::vector<PairScore> pair_scores(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                                   const MergeScheme& scheme) {
  std::map<std::string, std::map<Cell, std::map<std::string, Label>>> by_recipe;
  for (const auto& r : filtered(records, kinds)) {
    by_recipe[r.recipe][{r.document_id, r.item_kind, r.item_ordinal}][r.annotator] = merge_label(r.label, scheme);
  }
  std::vector<PairScore> out;
  for (const auto& [recipe, cells] : by_recipe) {
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<Label>, std::vector<Label>>> seqs;
    for (const auto& [cell, labels] : cells) {
      for (auto i = labels.begin(); i != labels.end(); ++i) {
        for (auto j = std::next(i); j != labels.end(); ++j) {
          auto& s = seqs[{i->first, j->first}];
          s.first.push_back(i->second);
          s.second.push_back(j->second);
        }
      }
    }
    for (const auto& [pair, s] : seqs) {
      PairScore p{recipe, pair.first, pair.second, s.first.size(), 0, cohens_kappa(s.first, s.second)};
      for (std::size_t k = 0; k < s.first.size(); ++k) p.same += s.first[k] == s.second[k];
      out.push_back(std::move(p));
    }
  }
  return out;
}

AgreementReport macro_kappa(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                            const MergeScheme& scheme) {
  AgreementReport report;
  report.pairs = pair_scores(records, kinds, scheme);
  if (report.pairs.empty()) throw PreconditionError("macro_kappa: no doubly-annotated items");
  std::vector<double> values;
  for (const auto& p : report.pairs) values.push_back(p.kappa);
  report.macro_kappa = mean(values);
  return report;
}

AccuracyReport human_macro_accuracy(const std::vector<AnnotationRecord>& records, const std::vector<ItemKind>& kinds,
                                    const MergeScheme& scheme) {
  std::map<std::pair<std::string, std::string>, PairAccuracy> pairs;
  for (const auto& p : pair_scores(records, kinds, scheme)) {
    auto& acc = pairs[{p.annotator_a, p.annotator_b}];
    acc.annotator_a = p.annotator_a;
    acc.annotator_b = p.annotator_b;
    acc.recipes.push_back({p.recipe, p.same, p.shared});
  }
  if (pairs.empty()) throw PreconditionError("human_macro_accuracy: no annotator pair shares an item");
  AccuracyReport report;
  report.kind = AccuracyKind::HumanMacro;
  std::vector<double> outer;
  for (auto& [key, acc] : pairs) {
    std::vector<double> inner;
    for (const auto& r : acc.recipes) inner.push_back(r.ratio());
    acc.value = mean(inner);
    outer.push_back(acc.value);
    report.pairs.push_back(std::move(acc));
  }
  report.value = mean(outer);
  return report;
}

AccuracyReport model_accuracy(const std::vector<AnnotationRecord>& model_records,
                              const std::vector<AnnotationRecord>& human_records, const std::vector<ItemKind>& kinds,
                              const MergeScheme& scheme) {
  const auto model = filtered(model_records, kinds);
  if (model.empty()) throw PreconditionError("model_accuracy: no model records");
  AccuracyReport report;
  report.kind = AccuracyKind::ModelMacro;
  report.model = model.front().annotator;
  std::map<std::pair<std::string, Cell>, Label> predicted;
  for (const auto& r : model) {
    if (r.annotator != report.model) {
      throw PreconditionError("model_accuracy: records of several models (" + report.model + ", " + r.annotator + ")");
    }
    predicted.emplace(std::pair{r.recipe, Cell{r.document_id, r.item_kind, r.item_ordinal}},
                      merge_label(r.label, scheme));
  }
  std::map<std::pair<std::string, Cell>, std::set<Label>> human;
  for (const auto& r : filtered(human_records, kinds)) {
    human[{r.recipe, {r.document_id, r.item_kind, r.item_ordinal}}].insert(merge_label(r.label, scheme));
  }
  std::map<std::string, RecipeRatio> ratios;
  for (const auto& [cell, labels] : human) {
    const auto guess = predicted.find(cell);
    if (guess == predicted.end()) {
      ++report.unmatched;
      continue;
    }
    auto& ratio = ratios[cell.first];
    ratio.recipe = cell.first;
    ++ratio.total;
    ratio.same += labels.count(guess->second);
  }
  if (ratios.empty()) throw PreconditionError("model_accuracy: no item annotated by both humans and " + report.model);
  std::vector<double> values;
  for (auto& [recipe, ratio] : ratios) {
    values.push_back(ratio.ratio());
    report.recipes.push_back(std::move(ratio));
  }
  report.value = mean(values);
  return report;
}

double round_percentage(std::size_t count, std::size_t total) {
  if (total == 0) return 0.0;
  const auto hundredths = (static_cast<unsigned long long>(count) * 20000ULL + total) / (2ULL * total);
  return static_cast<double>(hundredths) / 100.0;
}

SelectionSummary selection_summary(const std::vector<AnnotationRecord>& records, ItemKind kind) {
  SelectionSummary summary;
  summary.kind = kind;
  std::map<Label, std::size_t> counts;
  for (const auto& r : records) {
    if (r.item_kind != kind) continue;
    ++counts[r.label];
    ++summary.total;
  }
  if (summary.total == 0) return summary;
  for (const auto& label : all_labels(kind)) {
    const std::size_t c = counts.count(label) ? counts[label] : 0;
    summary.rows.push_back({label, c, round_percentage(c, summary.total)});
  }
  return summary;
}

std::size_t NeverFound::count_of(const Label& label) const {
  for (const auto& c : counts) {
    if (c.label == label) return c.count;
  }
  return 0;
}

std::vector<NeverFound> never_found_items(const std::vector<AnnotationRecord>& records, ItemKind kind,
                                          const Label& top_label) {
  std::map<ItemKey, std::map<Label, std::size_t>> tallies;
  for (const auto& r : records) {
    if (r.item_kind == kind) ++tallies[r.item()][r.label];
  }
  std::vector<NeverFound> out;
  for (const auto& [item, tally] : tallies) {
    if (tally.count(top_label)) continue;
    NeverFound entry{item, {}};
    for (const auto& label : all_labels(kind)) {
      const auto it = tally.find(label);
      entry.counts.push_back({label, it == tally.end() ? 0 : it->second});
    }
    out.push_back(std::move(entry));
  }
  return out;
}

bool FoundPredicate::contains(const Label& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

FoundPredicate strict_predicate(ItemKind kind) { return {"strict", {all_labels(kind).front()}}; }

FoundPredicate broad_predicate(ItemKind kind) {
  switch (kind) {
    case ItemKind::Ingredient:
      return {"broad", {IngredientLabel::Found, IngredientLabel::FoundNotPerfect}};
    case ItemKind::TaskName:
      return {"broad", {TaskLabel::TaskFound, TaskLabel::TaskFoundNotExactWording}};
    case ItemKind::Tool:
      return {"broad", {ToolLabel::Found, ToolLabel::FoundNotExact, ToolLabel::ToolImplied}};
    case ItemKind::IngredientList:
      return {"broad", {IngredientListLabel::IngredientsMatch, IngredientListLabel::MostIngredientsMatch}};
  }
  throw PreconditionError("broad_predicate: unknown item kind");
}

std::vector<MissingCell> missing_coverage(const std::vector<AnnotationRecord>& records, ItemKind kind) {
  struct Universe {
    std::set<int> items;
    std::set<std::string> documents;
    std::set<std::pair<int, std::string>> cells;
  };
  std::map<std::string, Universe> recipes;
  for (const auto& r : records) {
    if (r.item_kind != kind) continue;
    auto& u = recipes[r.recipe];
    u.items.insert(r.item_ordinal);
    u.documents.insert(r.document_id);
    u.cells.insert({r.item_ordinal, r.document_id});
  }
  std::vector<MissingCell> out;
  for (const auto& [recipe, u] : recipes) {
    for (int item : u.items) {
      for (const auto& doc : u.documents) {
        if (!u.cells.count({item, doc})) out.push_back({{recipe, kind, item}, doc});
      }
    }
  }
  return out;
}

SaturationCurve saturation_curve(const std::vector<AnnotationRecord>& records, ItemKind kind,
                                 const FoundPredicate& predicate, const SamplingMode& mode) {
  const auto missing = missing_coverage(records, kind);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "saturation_curve: incomplete coverage for " << to_string(kind) << ", missing";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
      msg << " (" << missing[i].item.recipe << "#" << missing[i].item.ordinal << ", " << missing[i].document_id << ")";
    }
    if (missing.size() > shown) msg << " and " << missing.size() - shown << " more";
    throw PreconditionError(msg.str());
  }

  // recipe -> document -> item -> found
  std::map<std::string, std::map<std::string, std::map<int, bool>>> grid;
  for (const auto& r : records) {
    if (r.item_kind != kind) continue;
    bool& found = grid[r.recipe][r.document_id][r.item_ordinal];
    found = found || predicate.contains(r.label);
  }

  SaturationCurve curve{kind, predicate, mode, {}};
  int max_documents = 0;
  for (const auto& [recipe, docs] : grid) max_documents = std::max<int>(max_documents, static_cast<int>(docs.size()));

  for (int n = 1; n <= max_documents; ++n) {
    std::vector<double> per_recipe;
    for (const auto& [recipe, docs] : grid) {
      const int documents = static_cast<int>(docs.size());
      const int take = std::min(n, documents);
      // found[item][doc index]
      std::map<int, std::vector<char>> found;
      int d = 0;
      for (const auto& [doc, items] : docs) {
        for (const auto& [item, hit] : items) {
          auto& row = found[item];
          row.resize(documents, 0);
          row[d] = hit;
        }
        ++d;
      }
      const bool sample = mode.kind == SamplingMode::Kind::Sampled && subset_count(documents, take) > mode.count;
      double covered = 0.0;
      if (!sample) {
        for (const auto& [item, row] : found) {
          covered += exact_cover_fraction(documents, static_cast<int>(std::count(row.begin(), row.end(), 1)), take);
        }
        per_recipe.push_back(covered / static_cast<double>(found.size()));
        continue;
      }
      std::mt19937_64 rng(mode.seed ^ fnv1a64(recipe) ^ (static_cast<std::uint64_t>(n) << 32));
      std::vector<int> order(documents);
      std::size_t hits = 0;
      for (int s = 0; s < mode.count; ++s) {
        std::iota(order.begin(), order.end(), 0);
        for (int k = 0; k < take; ++k) {
          std::uniform_int_distribution<int> pick(k, documents - 1);
          std::swap(order[k], order[pick(rng)]);
        }
        for (const auto& [item, row] : found) {
          for (int k = 0; k < take; ++k) {
            if (row[order[k]]) {
              ++hits;
              break;
            }
          }
        }
      }
      per_recipe.push_back(static_cast<double>(hits) / (static_cast<double>(mode.count) * found.size()));
    }
    curve.points.push_back({n, 100.0 * mean(per_recipe)});
  }
  return curve;
}

std::string_view to_string(CreativityStatus status) {
  switch (status) {
    case CreativityStatus::Creative:
      return "creative";
    case CreativityStatus::Found:
      return "found";
    case CreativityStatus::Nonsense:
      return "nonsense";
  }
  return "?";
}

std::set<ItemKey> flagged_items(const GeneratedRecipe& recipe, const generation::ScreenVerdict& verdict) {
  std::set<ItemKey> out;
  for (const auto& note : verdict.wrongness_notes) {
    for (const auto& ing : recipe.ingredients) {
      if (contains_word(note, ing.name)) out.insert({recipe.name.text, ItemKind::Ingredient, ing.ordinal});
    }
    for (const auto& task : recipe.tasks) {
      if (contains_word(note, task.action)) out.insert({recipe.name.text, ItemKind::TaskName, task.ordinal});
    }
  }
  return out;
}

std::vector<CreativityEntry> creativity_report(const std::vector<AnnotationRecord>& judge_records,
                                               const std::vector<ItemKind>& kinds,
                                               const std::set<ItemKey>& nonsense_items) {
  const auto records = filtered(judge_records, kinds);
  for (ItemKind kind : kinds) {
    if (const auto missing = missing_coverage(records, kind); !missing.empty()) {
      throw PreconditionError("creativity_report: incomplete coverage for " + std::string(to_string(kind)) + " (" +
                              std::to_string(missing.size()) + " missing cells)");
    }
  }
  std::map<ItemKey, std::map<std::string, std::vector<Label>>> by_item;
  for (const auto& r : records) by_item[r.item()][r.document_id].push_back(r.label);

  std::vector<CreativityEntry> out;
  for (const auto& [item, docs] : by_item) {
    const auto found = broad_predicate(item.kind);
    CreativityEntry entry{item, CreativityStatus::Creative, docs.size(), {}, {}};
    std::map<Label, std::size_t> tally;
    bool assessable = false;
    for (const auto& [doc, labels] : docs) {
      bool hit = false;
      for (const auto& label : labels) {
        ++tally[label];
        assessable = assessable || !is_not_filled_in(label);
        hit = hit || found.contains(label);
      }
      if (hit) entry.found_in.push_back(doc);
    }
    if (!assessable) continue;
    for (const auto& label : all_labels(item.kind)) {
      const auto it = tally.find(label);
      entry.counts.push_back({label, it == tally.end() ? 0 : it->second});
    }
    if (!entry.found_in.empty()) {
      entry.status = CreativityStatus::Found;
    } else if (nonsense_items.count(item)) {
      entry.status = CreativityStatus::Nonsense;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace recipemem::stats
