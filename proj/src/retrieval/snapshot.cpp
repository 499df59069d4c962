#include "recipemem/retrieval/snapshot.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>
#include <tuple>

#include "recipemem/core/text.hpp"
#include "recipemem/retrieval/url.hpp"

namespace recipemem::retrieval {

namespace fs = std::filesystem;

Json snapshot_meta_to_json(const DocumentSnapshot& s) {
  Json j;
  j["document_id"] = s.document_id;
  j["recipe"] = s.recipe;
  j["engine"] = s.engine;
  j["query"] = s.query;
  j["rank"] = s.rank;
  j["targeted"] = s.targeted;
  j["url"] = s.url;
  j["fetched_at"] = format_timestamp(s.fetched_at);
  j["http_status"] = s.http_status;
  j["error"] = s.error;
  j["content_hash"] = stable_hash(s.html);
  return j;
}

DocumentSnapshot snapshot_meta_from_json(const Json& j) {
  try {
    DocumentSnapshot s;
    s.document_id = j.at("document_id").get<std::string>();
    s.recipe = j.at("recipe").get<std::string>();
    s.engine = j.at("engine").get<std::string>();
    s.query = j.value("query", "");
    s.rank = j.at("rank").get<int>();
    s.targeted = j.value("targeted", false);
    s.url = j.at("url").get<std::string>();
    s.fetched_at = parse_timestamp(j.at("fetched_at").get<std::string>());
    s.http_status = j.at("http_status").get<int>();
    s.error = j.value("error", "");
    return s;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("snapshot metadata: ") + e.what());
  }
}

SnapshotStore::SnapshotStore(std::string root) : root_(std::move(root)) {}

std::string SnapshotStore::html_path(const std::string& recipe, const std::string& document_id) const {
  return (fs::path(root_) / slugify(recipe) / (document_id + ".html")).string();
}

std::string SnapshotStore::meta_path(const std::string& recipe, const std::string& document_id) const {
  return (fs::path(root_) / slugify(recipe) / (document_id + ".meta.json")).string();
}

std::optional<DocumentSnapshot> SnapshotStore::load(const std::string& recipe, const std::string& document_id) const {
  const std::string meta = meta_path(recipe, document_id);
  if (!fs::exists(meta)) return std::nullopt;
  const Json j = Json::parse(read_file(meta));
  DocumentSnapshot s = snapshot_meta_from_json(j);
  const std::string html = html_path(recipe, document_id);
  if (fs::exists(html)) s.html = read_file(html);
  if (j.contains("content_hash") && j["content_hash"].get<std::string>() != stable_hash(s.html)) {
    throw FormatError("snapshot " + html + " does not match its recorded content hash");
  }
  return s;
}

DocumentSnapshot SnapshotStore::store(const DocumentSnapshot& snapshot) {
  std::lock_guard lock(mu_);
  if (auto existing = load(snapshot.recipe, snapshot.document_id)) return *existing;
  // the metadata file is written last and marks the snapshot complete
  write_file(html_path(snapshot.recipe, snapshot.document_id), snapshot.html);
  write_file(meta_path(snapshot.recipe, snapshot.document_id), snapshot_meta_to_json(snapshot).dump(2) + "\n");
  return snapshot;
}

std::vector<DocumentSnapshot> SnapshotStore::list(const std::string& recipe) const {
  std::vector<DocumentSnapshot> out;
  const fs::path dir = fs::path(root_) / slugify(recipe);
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    constexpr std::string_view suffix = ".meta.json";
    if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    if (auto s = load(recipe, name.substr(0, name.size() - suffix.size()))) out.push_back(std::move(*s));
  }
  std::sort(out.begin(), out.end(), [](const DocumentSnapshot& a, const DocumentSnapshot& b) {
    return std::tie(a.targeted, a.rank, a.engine, a.document_id) < std::tie(b.targeted, b.rank, b.engine, b.document_id);
  });
  return out;
}

PolitenessGate::PolitenessGate(std::chrono::milliseconds interval) : interval_(interval) {}

void PolitenessGate::wait_turn(const std::string& host) {
  if (interval_.count() <= 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    auto& next = next_slot_[host];
    slot = std::max(now, next);
    next = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

Fetcher::Fetcher(FetcherOptions options, Clock clock)
    : options_(std::move(options)), clock_(std::move(clock)), gate_(std::chrono::milliseconds(options_.politeness_ms)) {}

DocumentSnapshot fetch_document(const SearchResult& result, const std::string& recipe, SnapshotStore& store,
                                Fetcher& fetcher) {
  const std::string id = result.document_id.empty() ? document_id(result.url) : result.document_id;
  if (auto existing = store.load(recipe, id)) return *existing;
  DocumentSnapshot s;
  s.document_id = id;
  s.recipe = recipe;
  s.engine = result.engine;
  s.query = result.query;
  s.rank = result.rank;
  s.targeted = result.targeted;
  s.url = result.url;
  const FetchResponse response = fetcher.get(result.url);
  s.fetched_at = fetcher.now();
  s.http_status = response.status;
  s.error = response.error;
  if (response.status >= 200 && response.status < 300) s.html = response.body;
  return store.store(s);
}

std::vector<DocumentSnapshot> fetch_all(const std::vector<SearchResult>& results, const std::string& recipe,
                                        SnapshotStore& store, Fetcher& fetcher) {
  std::vector<DocumentSnapshot> out(results.size());
  std::vector<std::exception_ptr> errors(results.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      try {
        out[i] = fetch_document(results[i], recipe, store, fetcher);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(results.size(), static_cast<std::size_t>(std::max(1, fetcher.options().max_concurrency)));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace recipemem::retrieval
