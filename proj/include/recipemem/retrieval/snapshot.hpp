#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "recipemem/core/records.hpp"
#include "recipemem/core/time.hpp"
#include "recipemem/retrieval/search.hpp"

namespace recipemem::retrieval {

struct DocumentSnapshot {
  std::string document_id;
  std::string recipe;
  std::string engine;
  std::string query;
  int rank = 0;
  bool targeted = false;
  std::string url;
  Timestamp fetched_at{};
  std::string html;
  int http_status = 0;  // 0 when the request never got a response
  std::string error;    // transport error text, if any

  // Usable for annotation: 2xx with a body.
  bool ok() const { return http_status >= 200 && http_status < 300 && !html.empty(); }
  friend bool operator==(const DocumentSnapshot&, const DocumentSnapshot&) = default;
};

Json snapshot_meta_to_json(const DocumentSnapshot& s);
DocumentSnapshot snapshot_meta_from_json(const Json& j);

// snapshot_dir/<recipe-slug>/<document_id>.html + <document_id>.meta.json.
// Write-once: storing an id that already exists keeps the stored copy.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::string root);

  const std::string& root() const { return root_; }
  std::string html_path(const std::string& recipe, const std::string& document_id) const;
  std::string meta_path(const std::string& recipe, const std::string& document_id) const;

  std::optional<DocumentSnapshot> load(const std::string& recipe, const std::string& document_id) const;
  // Returns the snapshot now on disk (the earlier one if it already existed).
  DocumentSnapshot store(const DocumentSnapshot& snapshot);
  // Every snapshot of a recipe, ordered by (targeted, rank, engine, document_id).
  std::vector<DocumentSnapshot> list(const std::string& recipe) const;

 private:
  std::string root_;
  mutable std::mutex mu_;
};

struct FetchResponse {
  int status = 0;
  std::string body;
  std::string error;
};

// Spaces requests to the same host at least `interval` apart; thread-safe.
// file:// URLs are never delayed.
class PolitenessGate {
 public:
  explicit PolitenessGate(std::chrono::milliseconds interval);
  void wait_turn(const std::string& host);

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

struct FetcherOptions {
  int politeness_ms = 2000;
  int timeout_ms = 20000;
  int max_concurrency = 4;
  std::string user_agent = "recipemem/1.0";
};

// http(s) via a blocking client with redirects followed; file:// reads the
// file (missing file = 404).
class Fetcher {
 public:
  explicit Fetcher(FetcherOptions options = {}, Clock clock = system_clock());

  FetchResponse get(const std::string& url);
  Timestamp now() const { return clock_(); }
  const FetcherOptions& options() const { return options_; }

 private:
  FetcherOptions options_;
  Clock clock_;
  PolitenessGate gate_;
};

// Returns the stored snapshot when there is one; otherwise fetches, persists,
// then returns. Failed fetches are persisted too (status kept, html empty).
DocumentSnapshot fetch_document(const SearchResult& result, const std::string& recipe, SnapshotStore& store,
                                Fetcher& fetcher);

// Fetches concurrently (bounded by the fetcher's max_concurrency); output
// order follows `results`.
std::vector<DocumentSnapshot> fetch_all(const std::vector<SearchResult>& results, const std::string& recipe,
                                        SnapshotStore& store, Fetcher& fetcher);

}  // namespace recipemem::retrieval
