#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "recipemem/annotation/assignments.hpp"
#include "recipemem/annotation/service.hpp"
#include "recipemem/cli/study.hpp"
#include "recipemem/core/items.hpp"
#include "recipemem/core/text.hpp"
#include "recipemem/core/validation.hpp"
#include "recipemem/extraction/document.hpp"
#include "recipemem/generation/generator.hpp"
#include "recipemem/generation/screening.hpp"
#include "recipemem/judge/judge.hpp"
#include "recipemem/parser/extract.hpp"
#include "recipemem/parser/recipe_xml.hpp"
#include "recipemem/retrieval/search.hpp"
#include "recipemem/retrieval/snapshot.hpp"
#include "recipemem/retrieval/url.hpp"
#include "recipemem/stats/report.hpp"

namespace recipemem::cli {

namespace fs = std::filesystem;

namespace {

class Gateways {
 public:
  explicit Gateways(const StudySettings& settings) : settings_(settings) {}
  const llm::Gateway& get(const std::string& model_id) {
    auto it = cache_.find(model_id);
    if (it == cache_.end()) {
      auto config = settings_.model(model_id);
      config.model_id = model_id;
      it = cache_.emplace(model_id, std::make_unique<llm::Gateway>(llm::make_gateway(config))).first;
    }
    return *it->second;
  }

 private:
  const StudySettings& settings_;
  std::map<std::string, std::unique_ptr<llm::Gateway>> cache_;
};

// Runs fn(i) for i in [0, n) on up to `width` threads.
template <typename F>
void parallel_for(std::size_t n, int width, F fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, width)));
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

void reset_dir(const std::string& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

std::string slug(const std::string& recipe) { return slugify(recipe); }

Json candidate_to_json(const generation::Candidate& c) {
  return {{"recipe", c.recipe},     {"variant", c.variant},        {"prompt_type", c.prompt_type},
          {"prompt", c.prompt},     {"text", c.text},              {"hit_length_limit", c.hit_length_limit},
          {"generator_id", c.generator_id}};
}

Json verdict_to_json(const std::string& recipe, const generation::ScreenVerdict& v) {
  return {{"recipe", recipe},
          {"candidate_id", v.candidate_id},
          {"variant", v.variant},
          {"repetition",
           {{"flagged", v.repetition.flagged},
            {"start_line", v.repetition.start_line},
            {"end_line", v.repetition.end_line},
            {"run_length", v.repetition.run_length}}},
          {"misunderstanding", v.misunderstanding},
          {"misunderstanding_reason", v.misunderstanding_reason},
          {"wrongness_notes", v.wrongness_notes},
          {"overall", v.overall == generation::Verdict::Pass ? "pass" : "reject"}};
}

generation::ScreenVerdict verdict_from_json(const Json& j) {
  generation::ScreenVerdict v;
  v.candidate_id = j.at("candidate_id").get<std::string>();
  v.variant = j.at("variant").get<int>();
  v.wrongness_notes = j.at("wrongness_notes").get<std::vector<std::string>>();
  v.overall = j.at("overall") == "pass" ? generation::Verdict::Pass : generation::Verdict::Reject;
  return v;
}

Json result_to_json(const retrieval::SearchResult& r) {
  return {{"url", r.url},   {"document_id", r.document_id}, {"engine", r.engine},
          {"query", r.query}, {"rank", r.rank},             {"targeted", r.targeted}};
}

retrieval::SearchResult result_from_json(const Json& j) {
  retrieval::SearchResult r;
  r.url = j.at("url").get<std::string>();
  r.document_id = j.at("document_id").get<std::string>();
  r.engine = j.at("engine").get<std::string>();
  r.query = j.at("query").get<std::string>();
  r.rank = j.at("rank").get<int>();
  r.targeted = j.value("targeted", false);
  return r;
}

std::vector<GeneratedRecipe> load_recipes(const Study& study) {
  std::vector<GeneratedRecipe> out;
  for (const auto& j : read_json_lines(study.path("recipes/recipes.jsonl"))) out.push_back(recipe_from_json(j));
  return out;
}

std::vector<std::shared_ptr<retrieval::SearchEngine>> make_engines(const StudySettings& s) {
  std::vector<std::shared_ptr<retrieval::SearchEngine>> out;
  for (const auto& e : s.retrieval.engines) {
    if (e.type == "mock") {
      out.push_back(retrieval::MockSearchEngine::from_file(e.fixture));
    } else {
      out.push_back(std::make_shared<retrieval::HttpSearchEngine>(
          retrieval::HttpSearchOptions{e.id, e.endpoint, e.api_key_env, e.timeout_ms}));
    }
  }
  return out;
}

retrieval::FetcherOptions fetcher_options(const StudySettings& s) {
  retrieval::FetcherOptions o;
  o.politeness_ms = s.retrieval.politeness_ms;
  o.timeout_ms = s.retrieval.timeout_ms;
  o.max_concurrency = s.retrieval.max_concurrency;
  return o;
}

struct CorpusEntry {
  retrieval::SearchResult result;
  bool backfill = false;
};

// Valid extracted documents of the main corpus (targeted ones excluded), in order.
std::vector<std::pair<extraction::ExtractedDocument, Json>> load_extracted(const Study& study, const std::string& recipe) {
  std::vector<std::pair<extraction::ExtractedDocument, Json>> out;
  const auto path = study.path("extracted/" + slug(recipe) + ".jsonl");
  if (!fs::exists(path)) return out;
  for (const auto& j : read_json_lines(path)) out.emplace_back(extraction::extracted_from_json(j.at("document")), j);
  return out;
}

extraction::ExtractedDocument extract_snapshot(const retrieval::DocumentSnapshot& snap, const llm::Gateway& gateway,
                                               const parser::ExtractOptions& options, extraction::ExtractionCache& cache) {
  try {
    return extraction::extract_document_lists(snap.document_id, extraction::html_to_text(snap.html), gateway, options,
                                              &cache);
  } catch (const Error& e) {
    extraction::ExtractedDocument doc;
    doc.document_id = snap.document_id;
    doc.extraction_model = options.model_id;
    doc.invalid_reason = e.what();
    return doc;
  }
}

Json extracted_line(const extraction::ExtractedDocument& doc, const retrieval::SearchResult& source, bool backfill) {
  Json d = extraction::extracted_to_json(doc);
  d.erase("from_cache");  // run-dependent; keeps reruns byte-stable
  return {{"document", d}, {"source", result_to_json(source)}, {"backfill", backfill}};
}

// ---- stages ---------------------------------------------------------------

std::string run_generate(Study& study, const RunOptions&) {
  const auto& s = study.settings();
  Gateways gateways(s);
  const auto templates =
      s.templates.empty() ? generation::TemplateSet::defaults() : generation::TemplateSet::load(s.templates);
  generation::StudyConfig config;
  config.recipe_names = s.recipes;
  config.selected = s.studied();
  config.k = s.generation.k;
  config.prompt_type = s.generation.prompt_type;
  config.model_id = s.generation.model;
  config.max_tokens = s.generation.max_tokens;
  config.temperature = s.generation.temperature;
  config.seed = s.seed;
  generation::validate(config);

  const auto& gateway = gateways.get(s.generation.model);
  const auto& screener = gateways.get(s.generation.screen_model);
  generation::ScreenOptions screen;
  screen.repetition_threshold = s.generation.repetition_threshold;
  screen.classifier_model = s.generation.screen_model;

  std::vector<Json> candidates, verdicts, selected;
  int chosen = 0;
  for (const auto& name : config.selected) {
    Json sel = {{"recipe", name.text}, {"origin", name.origin_tag ? Json(*name.origin_tag) : Json()}};
    try {
      auto batch = generation::generate_k(name, config, templates, gateway);
      std::vector<generation::ScreenVerdict> vs;
      for (const auto& c : batch.candidates) {
        candidates.push_back(candidate_to_json(c));
        vs.push_back(generation::screen_recipe(c, screener, screen));
        verdicts.push_back(verdict_to_json(name.text, vs.back()));
      }
      for (const auto& f : batch.failures) {
        candidates.push_back({{"recipe", f.recipe}, {"variant", f.variant}, {"error", f.error}});
      }
      const auto pick = generation::select_best_of_k(batch.candidates, vs, screener, s.generation.screen_model);
      sel["reason"] = pick.reason;
      if (pick.chosen) {
        sel["excluded"] = false;
        sel["candidate"] = candidate_to_json(*pick.chosen);
        ++chosen;
      } else {
        sel["excluded"] = true;
      }
    } catch (const Error& e) {
      sel["excluded"] = true;
      sel["reason"] = std::string("generation failed: ") + e.what();
    }
    selected.push_back(sel);
  }
  reset_dir(study.path("generated"));
  write_json_lines(study.path("generated/candidates.jsonl"), candidates);
  write_json_lines(study.path("generated/verdicts.jsonl"), verdicts);
  write_json_lines(study.path("generated/selected.jsonl"), selected);
  return std::to_string(chosen) + " of " + std::to_string(config.selected.size()) + " recipes selected";
}

std::string run_parse(Study& study, const RunOptions&) {
  const auto& s = study.settings();
  Gateways gateways(s);
  parser::ExtractOptions options;
  options.model_id = s.parse.model;
  options.repair_attempts = s.parse.repair_attempts;

  reset_dir(study.path("recipes"));
  std::vector<Json> recipes, excluded;
  for (const auto& sel : read_json_lines(study.path("generated/selected.jsonl"))) {
    if (sel.at("excluded").get<bool>()) continue;
    const auto& c = sel.at("candidate");
    GeneratedRecipe r;
    r.name.text = sel.at("recipe").get<std::string>();
    if (!sel.at("origin").is_null()) r.name.origin_tag = sel.at("origin").get<std::string>();
    r.raw_text = c.at("text").get<std::string>();
    r.generator_id = c.at("generator_id").get<std::string>();
    r.prompt_type = c.at("prompt_type").get<int>();
    r.variant = c.at("variant").get<int>();
    try {
      const auto x = parser::extract_structured(r.raw_text, gateways.get(s.parse.model), options);
      r.ingredients = x.lists.ingredients;
      r.tasks = parser::propagate_tools(x.lists.tasks);
    } catch (const parser::ExtractionError& e) {
      excluded.push_back({{"recipe", r.name.text}, {"reason", e.what()}, {"last_reply", e.last_reply()}});
      continue;
    } catch (const Error& e) {
      excluded.push_back({{"recipe", r.name.text}, {"reason", e.what()}});
      continue;
    }
    auto violations = validate_recipe(r);
    if (r.ingredients.empty()) violations.push_back({"no_ingredients", "no ingredients extracted", std::nullopt});
    if (r.tasks.empty()) violations.push_back({"no_tasks", "no tasks extracted", std::nullopt});
    if (!violations.empty()) {
      Json list = Json::array();
      for (const auto& v : violations) list.push_back(v.message);
      excluded.push_back({{"recipe", r.name.text}, {"reason", "invalid recipe"}, {"violations", list}});
      continue;
    }
    write_file(study.path("recipes/" + slug(r.name.text) + ".xml"), parser::serialize_recipe_xml(r));
    recipes.push_back(recipe_to_json(r));
  }
  write_json_lines(study.path("recipes/recipes.jsonl"), recipes);
  write_json_lines(study.path("recipes/excluded.jsonl"), excluded);
  return std::to_string(recipes.size()) + " recipes parsed, " + std::to_string(excluded.size()) + " excluded";
}

std::string run_retrieve(Study& study, const RunOptions& options) {
  const auto& s = study.settings();
  auto engines = make_engines(s);
  retrieval::SnapshotStore store(study.path("snapshots"));
  retrieval::Fetcher fetcher(fetcher_options(s), options.clock);

  reset_dir(study.path("corpus"));
  std::size_t total = 0;
  std::ostringstream shortages;
  for (const auto& recipe : load_recipes(study)) {
    const auto outcome = retrieval::search_all(recipe.name, engines, s.retrieval.per_engine_count);
    Json j = {{"recipe", recipe.name.text}, {"query", retrieval::base_query(recipe.name)}};
    Json candidates = Json::array(), documents = Json::array(), excluded = Json::array();
    for (const auto& r : outcome.results) candidates.push_back(result_to_json(r));

    std::size_t next = 0, ok = 0;
    while (ok < static_cast<std::size_t>(s.retrieval.nd) && next < outcome.results.size()) {
      const std::size_t want = std::min(outcome.results.size() - next, s.retrieval.nd - ok);
      std::vector<retrieval::SearchResult> batch(outcome.results.begin() + next, outcome.results.begin() + next + want);
      next += want;
      for (const auto& snap : retrieval::fetch_all(batch, recipe.name.text, store, fetcher)) {
        if (snap.ok()) {
          documents.push_back(snap.document_id);
          ++ok;
        } else {
          excluded.push_back({{"document_id", snap.document_id}, {"http_status", snap.http_status}, {"error", snap.error}});
        }
      }
    }
    Json shortfalls = Json::array(), failures = Json::array();
    for (const auto& sf : outcome.shortfalls) {
      shortfalls.push_back({{"engine", sf.engine}, {"requested", sf.requested}, {"returned", sf.returned}});
    }
    for (const auto& f : outcome.failures) failures.push_back({{"engine", f.engine}, {"message", f.message}});
    j["candidates"] = candidates;
    j["fetched"] = next;
    j["documents"] = documents;
    j["excluded"] = excluded;
    j["shortfalls"] = shortfalls;
    j["engine_failures"] = failures;
    write_file(study.path("corpus/" + slug(recipe.name.text) + ".json"), j.dump(2) + "\n");
    total += ok;
    if (ok < static_cast<std::size_t>(s.retrieval.nd)) shortages << " " << recipe.name.text << "=" << ok;
  }
  std::string summary = std::to_string(total) + " documents retrieved";
  if (!shortages.str().empty()) summary += "; below nd:" + shortages.str();
  return summary;
}

std::string run_extract(Study& study, const RunOptions& options) {
  const auto& s = study.settings();
  Gateways gateways(s);
  const auto& gateway = gateways.get(s.extraction.model);
  parser::ExtractOptions xo;
  xo.model_id = s.extraction.model;
  xo.repair_attempts = s.extraction.repair_attempts;
  extraction::ExtractionCache cache(study.path("cache/extraction"));
  retrieval::SnapshotStore store(study.path("snapshots"));
  retrieval::Fetcher fetcher(fetcher_options(s), options.clock);

  reset_dir(study.path("extracted"));
  std::size_t valid_total = 0, backfilled = 0;
  for (const auto& recipe : load_recipes(study)) {
    const Json corpus = Json::parse(read_file(study.path("corpus/" + slug(recipe.name.text) + ".json")));
    std::vector<retrieval::SearchResult> candidates;
    for (const auto& c : corpus.at("candidates")) candidates.push_back(result_from_json(c));
    std::map<std::string, retrieval::SearchResult> by_id;
    for (const auto& c : candidates) by_id.emplace(c.document_id, c);

    std::vector<retrieval::DocumentSnapshot> snaps;
    for (const auto& id : corpus.at("documents")) {
      auto snap = store.load(recipe.name.text, id.get<std::string>());
      if (!snap) throw StageError("snapshot missing for " + id.get<std::string>() + "; rerun retrieve");
      snaps.push_back(std::move(*snap));
    }
    std::vector<extraction::ExtractedDocument> docs(snaps.size());
    parallel_for(snaps.size(), gateway.max_concurrency(),
                 [&](std::size_t i) { docs[i] = extract_snapshot(snaps[i], gateway, xo, cache); });

    std::vector<Json> lines;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      lines.push_back(extracted_line(docs[i], by_id.at(docs[i].document_id), false));
      valid += docs[i].valid;
    }
    // Replace rejected documents with the next-ranked candidates.
    for (std::size_t next = corpus.at("fetched").get<std::size_t>();
         valid < static_cast<std::size_t>(s.retrieval.nd) && next < candidates.size(); ++next) {
      const auto snap = retrieval::fetch_document(candidates[next], recipe.name.text, store, fetcher);
      if (!snap.ok()) continue;
      const auto doc = extract_snapshot(snap, gateway, xo, cache);
      lines.push_back(extracted_line(doc, candidates[next], true));
      valid += doc.valid;
      ++backfilled;
    }
    write_json_lines(study.path("extracted/" + slug(recipe.name.text) + ".jsonl"), lines);
    valid_total += valid;
  }
  return std::to_string(valid_total) + " valid documents, " + std::to_string(backfilled) + " backfill fetches";
}

judge::TaxonomySet load_taxonomies(const StudySettings& s) {
  const TaskScheme scheme = s.judge.task_classes == 2 ? TaskScheme::TwoClass : TaskScheme::FourClass;
  return s.taxonomy.empty() ? judge::TaxonomySet::defaults(scheme) : judge::TaxonomySet::load(s.taxonomy, scheme);
}

std::vector<extraction::ExtractedDocument> valid_documents(const Study& study, const std::string& recipe) {
  std::vector<extraction::ExtractedDocument> out;
  for (auto& [doc, line] : load_extracted(study, recipe)) {
    if (doc.valid) out.push_back(std::move(doc));
  }
  return out;
}

std::string run_judge(Study& study, const RunOptions& options) {
  const auto& s = study.settings();
  if (s.judge.models.empty()) throw ConfigError("no judge model configured (judge.models or --model)");
  Gateways gateways(s);
  const auto taxonomies = load_taxonomies(s);
  const auto recipes = load_recipes(study);

  std::vector<judge::StudyInput> inputs;
  for (const auto& r : recipes) inputs.push_back({r, valid_documents(study, r.name.text)});

  std::vector<judge::JudgeDecision> decisions;
  std::vector<judge::JudgeFailure> failures;
  std::vector<std::string> invalid;
  const auto judge_all = [&](const std::vector<judge::StudyInput>& in) {
    for (const auto& model : s.judge.models) {
      judge::JudgeOptions jo;
      jo.model_ids = {model};
      jo.max_parallel_documents = s.judge.max_parallel_documents;
      jo.clock = options.clock;
      auto run = judge::judge_study(in, taxonomies, gateways.get(model), jo);
      decisions.insert(decisions.end(), run.decisions.begin(), run.decisions.end());
      failures.insert(failures.end(), run.failures.begin(), run.failures.end());
      invalid.insert(invalid.end(), run.invalid_documents.begin(), run.invalid_documents.end());
    }
  };
  judge_all(inputs);

  // Exhaustivity check: search again for ingredients the primary model found nowhere.
  std::vector<Json> targeted;
  if (s.retrieval.targeted_count > 0 && !s.retrieval.engines.empty()) {
    auto engines = make_engines(s);
    retrieval::SnapshotStore store(study.path("snapshots"));
    retrieval::Fetcher fetcher(fetcher_options(s), options.clock);
    const auto& xgateway = gateways.get(s.extraction.model);
    parser::ExtractOptions xo;
    xo.model_id = s.extraction.model;
    xo.repair_attempts = s.extraction.repair_attempts;
    extraction::ExtractionCache cache(study.path("cache/extraction"));
    const std::string primary = s.judge.models.front();
    std::vector<judge::StudyInput> extra;
    for (const auto& input : inputs) {
      std::set<int> found;
      for (const auto& d : decisions) {
        const auto& rec = d.record;
        if (rec.annotator == primary && rec.recipe == input.recipe.name.text && rec.item_kind == ItemKind::Ingredient &&
            (rec.label == Label(IngredientLabel::Found) || rec.label == Label(IngredientLabel::FoundNotPerfect))) {
          found.insert(rec.item_ordinal);
        }
      }
      std::set<std::string> corpus_ids;
      for (const auto& doc : input.documents) corpus_ids.insert(doc.document_id);
      judge::StudyInput more{input.recipe, {}};
      for (const auto& ing : input.recipe.ingredients) {
        if (found.count(ing.ordinal)) continue;
        const auto results = retrieval::targeted_research(input.recipe.name, ing.name, *engines.front(),
                                                          s.retrieval.targeted_count, corpus_ids);
        for (const auto& r : results) {
          Json entry = {{"recipe", input.recipe.name.text}, {"ingredient", ing.name}, {"result", result_to_json(r)},
                        {"already_annotated", r.already_annotated}};
          if (!r.already_annotated) {
            const auto snap = retrieval::fetch_document(r, input.recipe.name.text, store, fetcher);
            entry["http_status"] = snap.http_status;
            if (snap.ok()) {
              auto doc = extract_snapshot(snap, xgateway, xo, cache);
              entry["valid"] = doc.valid;
              if (doc.valid) {
                corpus_ids.insert(doc.document_id);
                more.documents.push_back(std::move(doc));
              }
            }
          }
          targeted.push_back(entry);
        }
      }
      if (!more.documents.empty()) extra.push_back(std::move(more));
    }
    if (!extra.empty()) judge_all(extra);
  }

  reset_dir(study.path("judge"));
  std::vector<Json> lines;
  for (const auto& d : decisions) lines.push_back(judge::decision_to_json(d, &taxonomies.get(d.record.item_kind)));
  write_json_lines(study.path("judge/decisions.jsonl"), lines);
  std::vector<Json> failure_lines;
  for (const auto& f : failures) {
    failure_lines.push_back({{"model", f.model_id}, {"recipe", f.item.recipe}, {"item_kind", to_string(f.item.kind)},
                             {"item_ordinal", f.item.ordinal}, {"document_id", f.document_id}, {"error", f.error}});
  }
  write_json_lines(study.path("judge/failures.jsonl"), failure_lines);
  write_json_lines(study.path("judge/targeted.jsonl"), targeted);
  return std::to_string(decisions.size()) + " decisions, " + std::to_string(failures.size()) + " failures, " +
         std::to_string(targeted.size()) + " targeted results";
}

annotation::StudyUniverse build_universe(const Study& study) {
  const auto& s = study.settings();
  annotation::StudyUniverse u;
  u.study_id = s.study_id;
  u.recipes = load_recipes(study);
  std::vector<std::pair<std::string, std::vector<std::string>>> table;
  for (const auto& r : u.recipes) {
    auto& refs = u.documents[r.name.text];
    std::vector<std::string> ids;
    for (const auto& [doc, line] : load_extracted(study, r.name.text)) {
      if (!doc.valid) continue;
      refs.push_back({doc.document_id, line.at("source").at("url").get<std::string>()});
      ids.push_back(doc.document_id);
    }
    table.emplace_back(r.name.text, ids);
  }
  const auto path = study.path("annotation/assignments.jsonl");
  if (fs::exists(path)) {
    for (const auto& j : read_json_lines(path)) u.assignments.push_back(annotation::assignment_from_json(j));
  } else if (!s.annotation.annotators.empty()) {
    annotation::AssignmentParams params;
    params.per_annotator = s.annotation.per_annotator;
    params.overlap = s.annotation.overlap;
    params.seed = static_cast<std::uint64_t>(s.seed);
    u.assignments = annotation::generate_assignments(s.annotation.annotators, table, params);
  }
  return u;
}

std::string run_serve(Study& study, const RunOptions& options) {
  const auto& s = study.settings();
  if (s.annotation.annotators.empty()) throw ConfigError("no annotators configured (annotation.annotators)");
  if (options.force) fs::remove_all(study.path("annotation"));
  auto universe = build_universe(study);
  fs::create_directories(study.path("annotation"));
  std::vector<Json> rows;
  for (const auto& a : universe.assignments) rows.push_back(annotation::assignment_to_json(a));
  write_json_lines(study.path("annotation/assignments.jsonl"), rows);
  return std::to_string(universe.assignments.size()) + " assignments for " +
         std::to_string(s.annotation.annotators.size()) + " annotators";
}

std::vector<AnnotationRecord> human_records(const Study& study) {
  const auto dataset = study.path("records/export.jsonl");
  if (fs::exists(dataset)) return read_records_file(dataset);
  const auto live = study.path("records/human.jsonl");
  if (fs::exists(live) && fs::exists(study.path("annotation/assignments.jsonl"))) {
    annotation::AnnotationService service(build_universe(study), live);
    return service.export_records();
  }
  if (fs::exists(live)) return read_records_file(live);
  return {};
}

stats::StatsInputs stats_inputs(const Study& study) {
  const auto& s = study.settings();
  stats::StatsInputs in;
  in.recipes = load_recipes(study);
  in.human = human_records(study);
  for (const auto& j : read_json_lines(study.path("judge/decisions.jsonl"))) {
    in.judge.push_back(judge::decision_from_json(j).record);
  }
  for (const auto& j : read_json_lines(study.path("judge/targeted.jsonl"))) {
    if (j.value("valid", false)) in.targeted_documents.insert(j.at("result").at("document_id").get<std::string>());
  }
  std::map<std::string, generation::ScreenVerdict> verdicts;
  for (const auto& j : read_json_lines(study.path("generated/verdicts.jsonl"))) {
    auto v = verdict_from_json(j);
    verdicts.emplace(v.candidate_id, std::move(v));
  }
  for (const auto& r : in.recipes) {
    const auto it = verdicts.find(r.name.text + "#" + std::to_string(r.variant));
    if (it == verdicts.end()) continue;
    const auto flagged = stats::flagged_items(r, it->second);
    in.nonsense.insert(flagged.begin(), flagged.end());
  }
  in.extraction_model = s.extraction.model;
  return in;
}

stats::ReportOptions report_options(const StudySettings& s) {
  stats::ReportOptions o;
  o.model_scheme = {s.stats.classes == 3 ? IngredientScheme::ThreeClass : IngredientScheme::FourClass,
                    s.judge.task_classes == 2 ? TaskScheme::TwoClass : TaskScheme::FourClass};
  if (!s.judge.models.empty()) o.primary_model = s.judge.models.front();
  if (s.stats.sampling == "sampled") {
    o.saturation_mode = stats::SamplingMode::sampled(s.stats.sample_count, static_cast<std::uint64_t>(s.seed));
  }
  o.figures = s.stats.figures;
  return o;
}

std::string run_stats(Study& study, const RunOptions&) {
  const auto inputs = stats_inputs(study);
  const auto options = report_options(study.settings());
  const auto files = stats::build_report(inputs, options);
  reset_dir(study.path("reports"));
  stats::write_report(study.path("reports"), files);
  write_file(study.path("reports/summary.txt"), stats::report_text(inputs, options));
  return std::to_string(files.size()) + " report files";
}

}  // namespace

StageResult run_stage(Stage stage, Study& study, const RunOptions& options) {
  StudyLock lock(study.root());
  study.check_upstream(stage);
  StageResult result{stage, false, {}};
  if (!options.force && study.up_to_date(stage)) {
    result.summary = study.manifest().stages.at(stage).summary;
  } else {
    switch (stage) {
      case Stage::Generate:
        result.summary = run_generate(study, options);
        break;
      case Stage::Parse:
        result.summary = run_parse(study, options);
        break;
      case Stage::Retrieve:
        result.summary = run_retrieve(study, options);
        break;
      case Stage::Extract:
        result.summary = run_extract(study, options);
        break;
      case Stage::Judge:
        result.summary = run_judge(study, options);
        break;
      case Stage::Serve:
        result.summary = run_serve(study, options);
        break;
      case Stage::Stats:
        result.summary = run_stats(study, options);
        break;
    }
    study.mark_complete(stage, result.summary, options.clock());
    result.ran = true;
  }
  if (stage == Stage::Serve && options.serve) {
    annotation::AnnotationService service(build_universe(study), study.path("records/human.jsonl"), options.clock);
    options.serve(service, study.settings());
  }
  return result;
}

}  // namespace recipemem::cli
