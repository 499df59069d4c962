#pragma once

#include <set>
#include <string>
#include <vector>

#include "recipemem/core/types.hpp"
#include "recipemem/stats/stats.hpp"

namespace recipemem::stats {

struct StatsInputs {
  std::vector<GeneratedRecipe> recipes;
  std::vector<AnnotationRecord> human;
  std::vector<AnnotationRecord> judge;  // one annotator id per judging model
  std::set<ItemKey> nonsense;           // items flagged by screening
  // exhaustivity-check documents: evidence for creativity, left out of saturation
  std::set<std::string> targeted_documents;
  std::string extraction_model;
};

struct ReportOptions {
  // label merge used when comparing model and human labels
  MergeScheme model_scheme{IngredientScheme::ThreeClass, TaskScheme::TwoClass};
  // judge annotator whose records feed the saturation and creativity tables;
  // empty picks the first model id in sort order
  std::string primary_model;
  SamplingMode saturation_mode;
  bool figures = false;
};

struct ReportFile {
  std::string path;  // relative to the report directory
  std::string content;
};

std::string csv_field(std::string_view text);
std::string csv_row(const std::vector<std::string>& fields);

// Deterministic: identical inputs give byte-identical files in a fixed order.
std::vector<ReportFile> build_report(const StatsInputs& inputs, const ReportOptions& options);
void write_report(const std::string& directory, const std::vector<ReportFile>& files);

// Short human-readable digest of the headline numbers.
std::string report_text(const StatsInputs& inputs, const ReportOptions& options);

}  // namespace recipemem::stats
