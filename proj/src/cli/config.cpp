#include "recipemem/cli/config.hpp"

#include <filesystem>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::cli {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return fs::weakly_canonical(fs::path(base) / path).string();
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json gateway_json(const llm::GatewayConfig& g) {
  return {{"backend", g.backend},       {"endpoint_url", g.endpoint_url},         {"api_key", g.api_key},
          {"max_concurrency", g.max_concurrency}, {"retry_count", g.retry_count}, {"retry_backoff_ms", g.retry_backoff_ms},
          {"timeout_ms", g.timeout_ms}, {"mock_fixture", g.mock_fixture}};
}

}  // namespace

std::vector<RecipeName> StudySettings::studied() const {
  if (selected.empty()) return recipes;
  std::vector<RecipeName> out;
  for (const auto& name : selected) {
    const auto it = std::find_if(recipes.begin(), recipes.end(), [&](const RecipeName& r) { return r.text == name; });
    if (it == recipes.end()) throw ConfigError("selected recipe '" + name + "' is not in the recipe pool");
    out.push_back(*it);
  }
  return out;
}

const llm::GatewayConfig& StudySettings::model(const std::string& id) const {
  const auto it = models.find(id);
  if (it == models.end()) throw ConfigError("model '" + id + "' has no entry under \"models\"");
  return it->second;
}

StudySettings settings_from_json(const Json& j, const std::string& base_dir) {
  try {
    StudySettings s;
    read(j, "study_id", s.study_id);
    read(j, "seed", s.seed);
    for (const auto& r : j.value("recipes", Json::array())) {
      RecipeName name;
      if (r.is_string()) {
        name.text = r.get<std::string>();
      } else {
        name.text = r.at("name").get<std::string>();
        if (r.contains("origin") && !r.at("origin").is_null()) name.origin_tag = r.at("origin").get<std::string>();
      }
      s.recipes.push_back(std::move(name));
    }
    read(j, "selected", s.selected);
    read(j, "templates", s.templates);
    read(j, "taxonomy", s.taxonomy);
    s.templates = resolve(s.templates, base_dir);
    s.taxonomy = resolve(s.taxonomy, base_dir);
    const Json models = j.value("models", Json::object());
    for (const auto& [id, m] : models.items()) {
      llm::GatewayConfig g;
      g.model_id = id;
      read(m, "backend", g.backend);
      read(m, "endpoint_url", g.endpoint_url);
      read(m, "api_key", g.api_key);
      read(m, "max_concurrency", g.max_concurrency);
      read(m, "retry_count", g.retry_count);
      read(m, "retry_backoff_ms", g.retry_backoff_ms);
      read(m, "timeout_ms", g.timeout_ms);
      read(m, "mock_fixture", g.mock_fixture);
      g.mock_fixture = resolve(g.mock_fixture, base_dir);
      s.models.emplace(id, std::move(g));
    }
    if (const auto g = j.value("generation", Json::object()); !g.empty()) {
      read(g, "model", s.generation.model);
      read(g, "screen_model", s.generation.screen_model);
      read(g, "k", s.generation.k);
      read(g, "prompt_type", s.generation.prompt_type);
      read(g, "max_tokens", s.generation.max_tokens);
      read(g, "temperature", s.generation.temperature);
      read(g, "repetition_threshold", s.generation.repetition_threshold);
    }
    if (s.generation.screen_model.empty()) s.generation.screen_model = s.generation.model;
    if (const auto p = j.value("parse", Json::object()); !p.empty()) {
      read(p, "model", s.parse.model);
      read(p, "repair_attempts", s.parse.repair_attempts);
    }
    if (const auto r = j.value("retrieval", Json::object()); !r.empty()) {
      for (const auto& e : r.value("engines", Json::array())) {
        EngineSettings engine;
        read(e, "id", engine.id);
        read(e, "type", engine.type);
        read(e, "fixture", engine.fixture);
        read(e, "endpoint", engine.endpoint);
        read(e, "api_key_env", engine.api_key_env);
        read(e, "timeout_ms", engine.timeout_ms);
        engine.fixture = resolve(engine.fixture, base_dir);
        s.retrieval.engines.push_back(std::move(engine));
      }
      read(r, "per_engine_count", s.retrieval.per_engine_count);
      read(r, "nd", s.retrieval.nd);
      read(r, "politeness_ms", s.retrieval.politeness_ms);
      read(r, "timeout_ms", s.retrieval.timeout_ms);
      read(r, "max_concurrency", s.retrieval.max_concurrency);
      read(r, "targeted_count", s.retrieval.targeted_count);
    }
    if (const auto x = j.value("extraction", Json::object()); !x.empty()) {
      read(x, "model", s.extraction.model);
      read(x, "repair_attempts", s.extraction.repair_attempts);
    }
    if (const auto x = j.value("judge", Json::object()); !x.empty()) {
      read(x, "models", s.judge.models);
      read(x, "task_classes", s.judge.task_classes);
      read(x, "max_parallel_documents", s.judge.max_parallel_documents);
    }
    if (const auto a = j.value("annotation", Json::object()); !a.empty()) {
      read(a, "annotators", s.annotation.annotators);
      read(a, "per_annotator", s.annotation.per_annotator);
      read(a, "overlap", s.annotation.overlap);
      read(a, "host", s.annotation.host);
      read(a, "port", s.annotation.port);
      read(a, "static_dir", s.annotation.static_dir);
      s.annotation.static_dir = resolve(s.annotation.static_dir, base_dir);
    }
    if (const auto x = j.value("stats", Json::object()); !x.empty()) {
      read(x, "classes", s.stats.classes);
      read(x, "figures", s.stats.figures);
      read(x, "sampling", s.stats.sampling);
      read(x, "sample_count", s.stats.sample_count);
    }
    return s;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("study configuration: ") + e.what());
  }
}

Json settings_to_json(const StudySettings& s) {
  Json recipes = Json::array();
  for (const auto& r : s.recipes) {
    Json entry = {{"name", r.text}};
    if (r.origin_tag) entry["origin"] = *r.origin_tag;
    recipes.push_back(entry);
  }
  Json models = Json::object();
  for (const auto& [id, g] : s.models) models[id] = gateway_json(g);
  Json engines = Json::array();
  for (const auto& e : s.retrieval.engines) {
    engines.push_back({{"id", e.id}, {"type", e.type}, {"fixture", e.fixture}, {"endpoint", e.endpoint},
                       {"api_key_env", e.api_key_env}, {"timeout_ms", e.timeout_ms}});
  }
  return {
      {"study_id", s.study_id},
      {"seed", s.seed},
      {"recipes", recipes},
      {"selected", s.selected},
      {"templates", s.templates},
      {"taxonomy", s.taxonomy},
      {"models", models},
      {"generation",
       {{"model", s.generation.model}, {"screen_model", s.generation.screen_model}, {"k", s.generation.k},
        {"prompt_type", s.generation.prompt_type}, {"max_tokens", s.generation.max_tokens},
        {"temperature", s.generation.temperature}, {"repetition_threshold", s.generation.repetition_threshold}}},
      {"parse", {{"model", s.parse.model}, {"repair_attempts", s.parse.repair_attempts}}},
      {"retrieval",
       {{"engines", engines}, {"per_engine_count", s.retrieval.per_engine_count}, {"nd", s.retrieval.nd},
        {"politeness_ms", s.retrieval.politeness_ms}, {"timeout_ms", s.retrieval.timeout_ms},
        {"max_concurrency", s.retrieval.max_concurrency}, {"targeted_count", s.retrieval.targeted_count}}},
      {"extraction", {{"model", s.extraction.model}, {"repair_attempts", s.extraction.repair_attempts}}},
      {"judge",
       {{"models", s.judge.models}, {"task_classes", s.judge.task_classes},
        {"max_parallel_documents", s.judge.max_parallel_documents}}},
      {"annotation",
       {{"annotators", s.annotation.annotators}, {"per_annotator", s.annotation.per_annotator},
        {"overlap", s.annotation.overlap}, {"host", s.annotation.host}, {"port", s.annotation.port},
        {"static_dir", s.annotation.static_dir}}},
      {"stats",
       {{"classes", s.stats.classes}, {"figures", s.stats.figures}, {"sampling", s.stats.sampling},
        {"sample_count", s.stats.sample_count}}},
  };
}

StudySettings load_settings(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("configuration file not found: " + path);
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return settings_from_json(j, fs::absolute(path).parent_path().string());
}

void apply(StudySettings& s, const Overrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.nd) s.retrieval.nd = *o.nd;
  if (o.k) s.generation.k = *o.k;
  if (o.prompt_type) s.generation.prompt_type = *o.prompt_type;
  if (!o.models.empty()) s.judge.models = o.models;
  if (o.classes) s.stats.classes = *o.classes;
  if (o.task_classes) s.judge.task_classes = *o.task_classes;
  if (o.figures) s.stats.figures = true;
}

void validate(const StudySettings& s) {
  if (trim(s.study_id).empty()) throw ConfigError("study_id is required");
  if (s.recipes.empty()) throw ConfigError("the recipe pool is empty");
  (void)s.studied();
  if (s.generation.k < 1) throw ConfigError("k must be at least 1");
  if (s.generation.prompt_type < 1 || s.generation.prompt_type > 5) throw ConfigError("prompt type must be 1..5");
  if (s.retrieval.nd < 1) throw ConfigError("nd must be at least 1");
  if (s.retrieval.per_engine_count < 1) throw ConfigError("per_engine_count must be at least 1");
  if (s.stats.classes != 3 && s.stats.classes != 4) throw ConfigError("classes must be 3 or 4");
  if (s.judge.task_classes != 2 && s.judge.task_classes != 4) throw ConfigError("task classes must be 2 or 4");
  if (s.stats.sampling != "exact" && s.stats.sampling != "sampled") throw ConfigError("sampling must be exact or sampled");
  for (const auto& [id, m] : s.models) {
    if (!m.api_key.empty() && m.api_key.rfind("env:", 0) != 0) {
      throw ConfigError("model '" + id + "': api_key must name an environment variable (\"env:NAME\")");
    }
  }
  for (const auto& e : s.retrieval.engines) {
    if (e.type != "mock" && e.type != "http") throw ConfigError("engine '" + e.id + "': unknown type " + e.type);
  }
}

}  // namespace recipemem::cli
