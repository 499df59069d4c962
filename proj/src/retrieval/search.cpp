#include "recipemem/retrieval/search.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "recipemem/core/text.hpp"
#include "recipemem/retrieval/url.hpp"

namespace recipemem::retrieval {

MockSearchEngine::MockSearchEngine(std::string id) : id_(std::move(id)) {}

std::vector<std::string> MockSearchEngine::search(const std::string& query, int count) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (failing_) throw SearchError(id_ + ": engine unavailable");
  auto it = results_.find(query);
  if (it == results_.end()) return {};
  const auto n = std::min<std::size_t>(it->second.size(), static_cast<std::size_t>(std::max(count, 0)));
  return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n)};
}

void MockSearchEngine::add_results(std::string query, std::vector<std::string> urls) {
  std::lock_guard lock(mu_);
  results_[std::move(query)] = std::move(urls);
}

void MockSearchEngine::set_failing(bool on) {
  std::lock_guard lock(mu_);
  failing_ = on;
}

int MockSearchEngine::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::shared_ptr<MockSearchEngine> MockSearchEngine::from_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    auto engine = std::make_shared<MockSearchEngine>(j.at("engine").get<std::string>());
    for (const auto& [query, urls] : j.at("results").items()) {
      engine->add_results(query, urls.get<std::vector<std::string>>());
    }
    if (j.value("failing", false)) engine->set_failing(true);
    return engine;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("search fixture: ") + e.what());
  }
}

std::shared_ptr<MockSearchEngine> MockSearchEngine::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open search fixture " + path);
  return from_json(in);
}

std::string base_query(const RecipeName& name) { return name.text + " recipe"; }

SearchOutcome search(const RecipeName& name, SearchEngine& engine, int count) {
  if (count < 1) throw PreconditionError("result count must be positive");
  SearchOutcome out;
  const std::string query = base_query(name);
  std::vector<std::string> urls;
  try {
    urls = engine.search(query, count);
  } catch (const Error& e) {
    out.failures.push_back({engine.id(), e.what()});
    return out;
  }
  std::set<std::string> seen;
  for (const auto& url : urls) {
    if (static_cast<int>(out.results.size()) >= count) break;
    std::string id;
    try {
      id = document_id(url);
    } catch (const FormatError&) {
      continue;  // engines occasionally hand back relative or junk links
    }
    if (!seen.insert(id).second) continue;
    out.results.push_back({url, id, engine.id(), query, static_cast<int>(out.results.size()) + 1, false, false});
  }
  if (static_cast<int>(out.results.size()) < count) {
    out.shortfalls.push_back({engine.id(), count, static_cast<int>(out.results.size())});
  }
  return out;
}

SearchOutcome search_all(const RecipeName& name, const std::vector<std::shared_ptr<SearchEngine>>& engines,
                         int per_engine_count) {
  SearchOutcome merged;
  std::vector<std::vector<SearchResult>> lists;
  for (const auto& engine : engines) {
    auto one = search(name, *engine, per_engine_count);
    lists.push_back(std::move(one.results));
    merged.shortfalls.insert(merged.shortfalls.end(), one.shortfalls.begin(), one.shortfalls.end());
    merged.failures.insert(merged.failures.end(), one.failures.begin(), one.failures.end());
  }
  std::set<std::string> seen;
  for (int rank = 1; rank <= per_engine_count; ++rank) {
    for (const auto& list : lists) {
      if (rank > static_cast<int>(list.size())) continue;
      const auto& r = list[rank - 1];
      if (seen.insert(r.document_id).second) merged.results.push_back(r);
    }
  }
  return merged;
}

std::vector<SearchResult> targeted_research(const RecipeName& name, const std::string& missing_item,
                                            SearchEngine& engine, int count,
                                            const std::set<std::string>& corpus_ids) {
  if (trim(missing_item).empty()) throw PreconditionError("missing item must be non-empty");
  if (count < 1) throw PreconditionError("result count must be positive");
  const std::string query = base_query(name) + " " + trim(missing_item);
  std::vector<SearchResult> out;
  std::set<std::string> seen;
  for (const auto& url : engine.search(query, count)) {
    std::string id;
    try {
      id = document_id(url);
    } catch (const FormatError&) {
      continue;
    }
    if (!seen.insert(id).second) continue;
    out.push_back({url, id, engine.id(), query, static_cast<int>(out.size()) + 1, true, corpus_ids.count(id) > 0});
  }
  return out;
}

}  // namespace recipemem::retrieval
