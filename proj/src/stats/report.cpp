#include "recipemem/stats/report.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "recipemem/core/error.hpp"
#include "recipemem/core/items.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::stats {

namespace {

constexpr ItemKind kAllKinds[] = {ItemKind::Ingredient, ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList};

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

std::string kind_slug(ItemKind kind) {
  switch (kind) {
    case ItemKind::Ingredient:
      return "ingredients";
    case ItemKind::TaskName:
      return "task_names";
    case ItemKind::Tool:
      return "tools";
    case ItemKind::IngredientList:
      return "ingredient_lists";
  }
  return "items";
}

class ItemTexts {
 public:
  explicit ItemTexts(const std::vector<GeneratedRecipe>& recipes) {
    for (const auto& r : recipes) by_name_.emplace(r.name.text, &r);
  }
  std::string operator()(const ItemKey& key) const {
    const auto it = by_name_.find(key.recipe);
    if (it == by_name_.end()) return "#" + std::to_string(key.ordinal);
    try {
      const ItemKind kind = key.kind == ItemKind::Ingredient ? ItemKind::Ingredient : ItemKind::TaskName;
      return item_text(*it->second, kind, key.ordinal);
    } catch (const Error&) {
      return "#" + std::to_string(key.ordinal);
    }
  }

 private:
  std::map<std::string, const GeneratedRecipe*> by_name_;
};

std::vector<AnnotationRecord> of_annotator(const std::vector<AnnotationRecord>& records, const std::string& id) {
  std::vector<AnnotationRecord> out;
  for (const auto& r : records) {
    if (r.annotator == id) out.push_back(r);
  }
  return out;
}

std::vector<std::string> model_ids(const std::vector<AnnotationRecord>& judge) {
  std::set<std::string> ids;
  for (const auto& r : judge) ids.insert(r.annotator);
  return {ids.begin(), ids.end()};
}

std::string primary_model(const StatsInputs& inputs, const ReportOptions& options) {
  if (!options.primary_model.empty()) return options.primary_model;
  const auto ids = model_ids(inputs.judge);
  return ids.empty() ? std::string{} : ids.front();
}

// Records that feed the coverage-based tables: the primary model when judged,
// else the human annotations.
std::vector<AnnotationRecord> coverage_records(const StatsInputs& inputs, const ReportOptions& options) {
  const auto id = primary_model(inputs, options);
  return id.empty() ? effective_records(inputs.human) : effective_records(of_annotator(inputs.judge, id));
}

std::vector<AnnotationRecord> without_targeted(const std::vector<AnnotationRecord>& records,
                                              const std::set<std::string>& targeted) {
  std::vector<AnnotationRecord> out;
  for (const auto& r : records) {
    if (!targeted.count(r.document_id)) out.push_back(r);
  }
  return out;
}

std::string classes_column(ItemKind kind, const MergeScheme& scheme) {
  switch (kind) {
    case ItemKind::Ingredient:
      return scheme.ingredients == IngredientScheme::ThreeClass ? "3" : "4";
    case ItemKind::TaskName:
      return scheme.tasks == TaskScheme::TwoClass ? "2" : "4";
    default:
      return std::to_string(all_labels(kind).size());
  }
}

std::string selection_table(const SelectionSummary& summary) {
  std::string out = csv_row({"Selection", "Count", "Percentage"});
  for (const auto& row : summary.rows) {
    out += csv_row({std::string(label_text(row.label)), std::to_string(row.count), fixed(row.percentage, 2)});
  }
  out += csv_row({"Total", std::to_string(summary.total), summary.total ? "100.00" : "0.00"});
  return out;
}

std::optional<SaturationCurve> try_curve(const std::vector<AnnotationRecord>& records, ItemKind kind,
                                         const FoundPredicate& predicate, const SamplingMode& mode) {
  if (!missing_coverage(records, kind).empty()) return std::nullopt;
  bool any = false;
  for (const auto& r : records) any = any || r.item_kind == kind;
  if (!any) return std::nullopt;
  return saturation_curve(records, kind, predicate, mode);
}

}  // namespace

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::vector<ReportFile> build_report(const StatsInputs& inputs, const ReportOptions& options) {
  std::vector<ReportFile> files;
  const ItemTexts text(inputs.recipes);
  const auto human = effective_records(inputs.human);

  for (ItemKind kind : kAllKinds) {
    files.push_back({"selection_" + kind_slug(kind) + ".csv", selection_table(selection_summary(human, kind))});
  }

  {
    std::string out = csv_row({"Recipe", "Ingredient Name", "FNP", "NF", "IMP"});
    for (const auto& e : never_found_items(human, ItemKind::Ingredient, IngredientLabel::Found)) {
      out += csv_row({e.item.recipe, text(e.item), std::to_string(e.count_of(IngredientLabel::FoundNotPerfect)),
                      std::to_string(e.count_of(IngredientLabel::NotFound)),
                      std::to_string(e.count_of(IngredientLabel::Implied))});
    }
    files.push_back({"never_found_ingredients.csv", out});
  }
  {
    std::string out = csv_row({"Recipe", "Task", "TFNEW", "TNF", "TFWC"});
    for (const auto& e : never_found_items(human, ItemKind::TaskName, TaskLabel::TaskFound)) {
      out += csv_row({e.item.recipe, text(e.item), std::to_string(e.count_of(TaskLabel::TaskFoundNotExactWording)),
                      std::to_string(e.count_of(TaskLabel::TaskNotFound)),
                      std::to_string(e.count_of(TaskLabel::TaskFoundWrongContext))});
    }
    files.push_back({"never_found_tasks.csv", out});
  }

  {
    std::string pairs = csv_row({"Family", "Recipe", "Annotator A", "Annotator B", "Shared", "Same", "Kappa"});
    std::string summary = csv_row({"Family", "Pairs", "Macro Kappa", "Human Accuracy"});
    for (Family family : {Family::Ingredients, Family::Tasks}) {
      const auto scores = pair_scores(human, family_kinds(family));
      if (scores.empty()) continue;
      for (const auto& p : scores) {
        pairs += csv_row({std::string(to_string(family)), p.recipe, p.annotator_a, p.annotator_b,
                          std::to_string(p.shared), std::to_string(p.same), fixed(p.kappa, 6)});
      }
      const auto agreement = macro_kappa(human, family_kinds(family));
      const auto accuracy = human_macro_accuracy(human, family_kinds(family));
      summary += csv_row({std::string(to_string(family)), std::to_string(agreement.pair_count()),
                          fixed(agreement.macro_kappa, 6), fixed(accuracy.value, 6)});
    }
    files.push_back({"agreement_pairs.csv", pairs});
    files.push_back({"agreement_summary.csv", summary});
  }

  {
    std::string out =
        csv_row({"Annotation Model", "Extraction Model", "Item Kind", "Classes", "Items", "Unmatched", "Accuracy"});
    for (const auto& model : model_ids(inputs.judge)) {
      const auto records = of_annotator(inputs.judge, model);
      for (ItemKind kind : kAllKinds) {
        const std::vector<ItemKind> kinds{kind};
        try {
          const auto acc = model_accuracy(records, human, kinds, options.model_scheme);
          std::size_t items = 0;
          for (const auto& r : acc.recipes) items += r.total;
          out += csv_row({model, inputs.extraction_model, std::string(to_string(kind)),
                          classes_column(kind, options.model_scheme), std::to_string(items),
                          std::to_string(acc.unmatched), fixed(acc.value, 6)});
        } catch (const PreconditionError&) {
          // nothing shared with the human annotations for this kind
        }
      }
    }
    files.push_back({"model_accuracy.csv", out});
  }

  const auto coverage = coverage_records(inputs, options);
  const auto main_corpus = without_targeted(coverage, inputs.targeted_documents);
  std::map<ItemKind, std::pair<std::optional<SaturationCurve>, std::optional<SaturationCurve>>> curves;
  for (ItemKind kind : kAllKinds) {
    auto& [strict, broad] = curves[kind];
    strict = try_curve(main_corpus, kind, strict_predicate(kind), options.saturation_mode);
    broad = try_curve(main_corpus, kind, broad_predicate(kind), options.saturation_mode);
    for (const auto* curve : {&strict, &broad}) {
      if (!*curve) continue;
      std::string out = csv_row({"n", "percentage"});
      for (const auto& p : (*curve)->points) out += csv_row({std::to_string(p.n), fixed(p.percentage, 4)});
      files.push_back({"saturation_" + kind_slug(kind) + "_" + (*curve)->predicate.name + ".csv", out});
    }
  }

  {
    std::string out = csv_row({"Recipe", "Item Kind", "Ordinal", "Item", "Status", "Documents", "Found In"});
    const std::vector<ItemKind> kinds{ItemKind::Ingredient, ItemKind::TaskName};
    try {
      for (const auto& e : creativity_report(coverage, kinds, inputs.nonsense)) {
        std::string found_in;
        for (const auto& d : e.found_in) found_in += (found_in.empty() ? "" : " ") + d;
        out += csv_row({e.item.recipe, std::string(to_string(e.item.kind)), std::to_string(e.item.ordinal),
                        text(e.item), std::string(to_string(e.status)), std::to_string(e.documents), found_in});
      }
    } catch (const PreconditionError&) {
      // coverage incomplete: no creativity claims
    }
    files.push_back({"creativity.csv", out});
  }

  if (options.figures) {
    int max_n = 0;
    for (const auto& [kind, pair] : curves) {
      if (pair.first) max_n = std::max<int>(max_n, static_cast<int>(pair.first->points.size()));
    }
    std::string dat = "# n";
    for (ItemKind kind : kAllKinds) dat += " " + kind_slug(kind) + "_strict " + kind_slug(kind) + "_broad";
    dat += "\n";
    for (int n = 1; n <= max_n; ++n) {
      dat += std::to_string(n);
      for (ItemKind kind : kAllKinds) {
        for (const auto* curve : {&curves[kind].first, &curves[kind].second}) {
          const bool has = *curve && static_cast<int>((*curve)->points.size()) >= n;
          dat += " " + (has ? fixed((*curve)->points[n - 1].percentage, 4) : std::string("?"));
        }
      }
      dat += "\n";
    }
    std::string gp =
        "set datafile missing \"?\"\n"
        "set terminal pngcairo size 1200,900\n"
        "set output \"saturation.png\"\n"
        "set multiplot layout 2,2\n"
        "set xlabel \"documents combined (n)\"\n"
        "set ylabel \"found (%)\"\n"
        "set yrange [0:100]\n"
        "set key bottom right\n";
    int column = 2;
    for (ItemKind kind : kAllKinds) {
      gp += "set title \"" + std::string(to_string(kind)) + "\"\n";
      gp += "plot \"saturation.dat\" using 1:" + std::to_string(column) + " with linespoints title \"strict\", \"\" using 1:" +
            std::to_string(column + 1) + " with linespoints title \"broad\"\n";
      column += 2;
    }
    gp += "unset multiplot\n";
    files.push_back({"figures/saturation.dat", dat});
    files.push_back({"figures/saturation.gp", gp});
  }
  return files;
}

void write_report(const std::string& directory, const std::vector<ReportFile>& files) {
  for (const auto& f : files) {
    const auto path = std::filesystem::path(directory) / f.path;
    std::filesystem::create_directories(path.parent_path());
    write_file(path.string(), f.content);
  }
}

std::string report_text(const StatsInputs& inputs, const ReportOptions& options) {
  std::ostringstream out;
  const auto human = effective_records(inputs.human);
  out << "human records: " << human.size() << "\n";
  out << "judge records: " << effective_records(inputs.judge).size() << "\n";
  for (Family family : {Family::Ingredients, Family::Tasks}) {
    if (pair_scores(human, family_kinds(family)).empty()) continue;
    const auto agreement = macro_kappa(human, family_kinds(family));
    const auto accuracy = human_macro_accuracy(human, family_kinds(family));
    out << to_string(family) << ": macro kappa " << fixed(agreement.macro_kappa, 4) << " over "
        << agreement.pair_count() << " pairs, A_h " << fixed(100.0 * accuracy.value, 2) << "%\n";
  }
  for (const auto& model : model_ids(inputs.judge)) {
    for (ItemKind kind : {ItemKind::Ingredient, ItemKind::TaskName}) {
      try {
        const auto acc = model_accuracy(of_annotator(inputs.judge, model), human, {kind}, options.model_scheme);
        out << model << " " << to_string(kind) << ": A_m " << fixed(acc.value, 3) << " ("
            << classes_column(kind, options.model_scheme) << " classes)\n";
      } catch (const PreconditionError&) {
      }
    }
  }
  const auto coverage = coverage_records(inputs, options);
  const auto main_corpus = without_targeted(coverage, inputs.targeted_documents);
  for (ItemKind kind : kAllKinds) {
    if (const auto curve = try_curve(main_corpus, kind, broad_predicate(kind), options.saturation_mode)) {
      out << "saturation " << to_string(kind) << " (broad):";
      for (const auto& p : curve->points) out << " " << fixed(p.percentage, 1);
      out << "\n";
    }
  }
  try {
    std::size_t creative = 0;
    for (const auto& e : creativity_report(coverage, {ItemKind::Ingredient, ItemKind::TaskName}, inputs.nonsense)) {
      creative += e.status == CreativityStatus::Creative;
    }
    out << "creative items: " << creative << "\n";
  } catch (const PreconditionError&) {
    out << "creative items: coverage incomplete\n";
  }
  return out.str();
}

}  // namespace recipemem::stats
