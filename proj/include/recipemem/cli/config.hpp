#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/records.hpp"
#include "recipemem/core/types.hpp"
#include "recipemem/llm/gateway.hpp"

namespace recipemem::cli {

struct EngineSettings {
  std::string id;
  std::string type = "mock";  // "mock" or "http"
  std::string fixture;        // mock: JSON file
  std::string endpoint;       // http
  std::string api_key_env;    // http: name of the variable holding the key
  int timeout_ms = 20000;
};

// Study configuration file (JSON). Relative paths are resolved against the
// file's directory when loaded.
struct StudySettings {
  std::string study_id;
  std::int64_t seed = 0;
  std::vector<RecipeName> recipes;     // candidate pool
  std::vector<std::string> selected;   // names studied; empty means all
  std::string templates;               // prompt template file; empty = built-in
  std::string taxonomy;                // judge taxonomy file; empty = built-in
  std::map<std::string, llm::GatewayConfig> models;  // by model id

  struct Generation {
    std::string model;
    std::string screen_model;  // classifier and tie-break judge; defaults to model
    int k = 5;
    int prompt_type = 2;
    int max_tokens = 2048;
    double temperature = 0.7;
    int repetition_threshold = 6;
  } generation;

  struct Parse {
    std::string model;
    int repair_attempts = 2;
  } parse;

  struct Retrieval {
    std::vector<EngineSettings> engines;
    int per_engine_count = 6;
    int nd = 18;
    int politeness_ms = 2000;
    int timeout_ms = 20000;
    int max_concurrency = 4;
    int targeted_count = 0;  // documents per never-found ingredient; 0 disables
  } retrieval;

  struct Extraction {
    std::string model;
    int repair_attempts = 2;
  } extraction;

  struct Judge {
    std::vector<std::string> models;
    int task_classes = 4;
    int max_parallel_documents = 4;
  } judge;

  struct Annotation {
    std::vector<std::string> annotators;
    int per_annotator = 9;
    int overlap = 6;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
  } annotation;

  struct Stats {
    int classes = 3;
    bool figures = false;
    std::string sampling = "exact";  // or "sampled"
    int sample_count = 1000;
  } stats;

  std::vector<RecipeName> studied() const;
  const llm::GatewayConfig& model(const std::string& id) const;
};

// Command-line overrides; unset fields leave the file values alone.
struct Overrides {
  std::optional<std::int64_t> seed;
  std::optional<int> nd;
  std::optional<int> k;
  std::optional<int> prompt_type;
  std::vector<std::string> models;
  std::optional<int> classes;
  std::optional<int> task_classes;
  bool figures = false;
};

StudySettings settings_from_json(const Json& j, const std::string& base_dir);
Json settings_to_json(const StudySettings& s);
StudySettings load_settings(const std::string& path);
void apply(StudySettings& s, const Overrides& o);

// Throws ConfigError naming the first problem.
void validate(const StudySettings& s);

}  // namespace recipemem::cli
