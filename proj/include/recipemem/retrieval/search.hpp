#pragma once

#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "recipemem/core/error.hpp"
#include "recipemem/core/types.hpp"

namespace recipemem::retrieval {

class SearchError : public Error {
 public:
  using Error::Error;
};

struct SearchResult {
  std::string url;
  std::string document_id;
  std::string engine;
  std::string query;
  int rank = 0;  // 1-based within its engine
  bool targeted = false;
  bool already_annotated = false;  // targeted result that is already in the main corpus
};

class SearchEngine {
 public:
  virtual ~SearchEngine() = default;
  virtual const std::string& id() const = 0;
  // At most `count` URLs in rank order. Throws SearchError on API failure.
  virtual std::vector<std::string> search(const std::string& query, int count) = 0;
};

// Query -> URL list table. Unknown queries return nothing.
class MockSearchEngine : public SearchEngine {
 public:
  explicit MockSearchEngine(std::string id);

  const std::string& id() const override { return id_; }
  std::vector<std::string> search(const std::string& query, int count) override;

  void add_results(std::string query, std::vector<std::string> urls);
  void set_failing(bool on);
  int calls() const;

  // JSON: {"engine":"a","results":{"koshari recipe":["https://..."]}}
  static std::shared_ptr<MockSearchEngine> from_json(std::istream& in);
  static std::shared_ptr<MockSearchEngine> from_file(const std::string& path);

 private:
  std::string id_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::string>> results_;
  bool failing_ = false;
  int calls_ = 0;
};

struct HttpSearchOptions {
  std::string id;
  // GET <endpoint>?q=<query>&count=<n>; the reply is JSON with a "results"
  // array of strings or of objects carrying "url" (or "link").
  std::string endpoint;
  std::string api_key_env;  // sent as "Authorization: Bearer ..." when set
  int timeout_ms = 30000;
};

class HttpSearchEngine : public SearchEngine {
 public:
  explicit HttpSearchEngine(HttpSearchOptions options);
  const std::string& id() const override { return options_.id; }
  std::vector<std::string> search(const std::string& query, int count) override;

 private:
  HttpSearchOptions options_;
};

std::string base_query(const RecipeName& name);

struct Shortfall {
  std::string engine;
  int requested = 0;
  int returned = 0;
};

struct EngineFailure {
  std::string engine;
  std::string message;
};

struct SearchOutcome {
  std::vector<SearchResult> results;  // merged, deduplicated by canonical URL
  std::vector<Shortfall> shortfalls;
  std::vector<EngineFailure> failures;
};

// One engine: its list truncated to `count`, duplicates within the engine
// dropped (best rank kept), shortfall recorded when fewer came back.
SearchOutcome search(const RecipeName& name, SearchEngine& engine, int count);

// All engines; results interleaved by rank, then engine order, each canonical
// URL kept once at its best position. Failing engines are recorded and skipped.
SearchOutcome search_all(const RecipeName& name, const std::vector<std::shared_ptr<SearchEngine>>& engines,
                         int per_engine_count);

// Query "<base query> <missing item>"; results tagged targeted and flagged when
// their document id is already in `corpus_ids`.
std::vector<SearchResult> targeted_research(const RecipeName& name, const std::string& missing_item,
                                            SearchEngine& engine, int count,
                                            const std::set<std::string>& corpus_ids);

}  // namespace recipemem::retrieval
