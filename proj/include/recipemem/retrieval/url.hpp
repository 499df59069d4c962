#pragma once

#include <string>
#include <string_view>

namespace recipemem::retrieval {

struct UrlParts {
  std::string scheme;  // lowercased
  std::string host;    // lowercased, no port
  int port = 0;        // 0 when absent
  std::string path;    // "/" when absent
  std::string query;   // without '?'
  std::string fragment;
};

// Throws FormatError for anything that is not scheme://[host][:port][/path][?query][#fragment].
UrlParts split_url(std::string_view url);

// scheme+host+path lowercased, default port, fragment and tracking query
// parameters (utm_*, gclid, fbclid, ...) removed, trailing slash dropped.
std::string canonical_url(std::string_view url);

// Stable hash of the canonical URL.
std::string document_id(std::string_view url);

bool is_tracking_parameter(std::string_view name);

// Percent-encodes a query component (RFC 3986 unreserved characters kept).
std::string url_encode(std::string_view s);

}  // namespace recipemem::retrieval
