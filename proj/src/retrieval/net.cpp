// HTTP clients for retrieval: the fetcher and the search-API adapter.
#include <httplib.h>

#include <json.hpp>

#include "recipemem/core/text.hpp"
#include "recipemem/llm/gateway.hpp"
#include "recipemem/retrieval/search.hpp"
#include "recipemem/retrieval/snapshot.hpp"
#include "recipemem/retrieval/url.hpp"

namespace recipemem::retrieval {

namespace {

std::string origin_of(const UrlParts& p) {
  std::string origin = p.scheme + "://" + p.host;
  if (p.port) origin += ":" + std::to_string(p.port);
  return origin;
}

std::string target_of(const UrlParts& p) { return p.query.empty() ? p.path : p.path + "?" + p.query; }

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

}  // namespace

FetchResponse Fetcher::get(const std::string& url) {
  UrlParts parts;
  try {
    parts = split_url(url);
  } catch (const FormatError& e) {
    return {0, {}, e.what()};
  }
  if (parts.scheme == "file") {
    const std::string path = percent_decode(parts.path);
    try {
      return {200, read_file(path), {}};
    } catch (const Error&) {
      return {404, {}, "no such file: " + path};
    }
  }
  if (parts.scheme != "http" && parts.scheme != "https") return {0, {}, "unsupported scheme " + parts.scheme};

  gate_.wait_turn(parts.host);
  httplib::Client client(origin_of(parts));
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);
  auto res = client.Get(target_of(parts), {{"User-Agent", options_.user_agent}});
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

HttpSearchEngine::HttpSearchEngine(HttpSearchOptions options) : options_(std::move(options)) {}

std::vector<std::string> HttpSearchEngine::search(const std::string& query, int count) {
  const UrlParts parts = split_url(options_.endpoint);
  httplib::Client client(origin_of(parts));
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    headers.emplace("Authorization", "Bearer " + llm::resolve_secret("env:" + options_.api_key_env));
  }
  std::string target = target_of(parts);
  target += parts.query.empty() ? "?" : "&";
  target += "q=" + url_encode(query) + "&count=" + std::to_string(count);
  auto res = client.Get(target, headers);
  if (!res) throw SearchError(options_.id + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw SearchError(options_.id + ": HTTP " + std::to_string(res->status));
  std::vector<std::string> urls;
  try {
    const auto j = nlohmann::json::parse(res->body);
    for (const auto& item : j.at("results")) {
      if (item.is_string()) {
        urls.push_back(item.get<std::string>());
      } else if (item.contains("url")) {
        urls.push_back(item["url"].get<std::string>());
      } else if (item.contains("link")) {
        urls.push_back(item["link"].get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SearchError(options_.id + ": malformed reply: " + e.what());
  }
  if (static_cast<int>(urls.size()) > count) urls.resize(static_cast<std::size_t>(count));
  return urls;
}

}  // namespace recipemem::retrieval
