#include "recipemem/retrieval/url.hpp"

#include <array>
#include <cctype>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::retrieval {

namespace {

int default_port(const std::string& scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  return 0;
}

}  // namespace

UrlParts split_url(std::string_view url) {
  UrlParts p;
  const std::size_t colon = url.find("://");
  if (colon == std::string_view::npos || colon == 0) throw FormatError("not an absolute URL: '" + std::string(url) + "'");
  p.scheme = to_lower(url.substr(0, colon));
  for (char c : p.scheme) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
      throw FormatError("bad URL scheme in '" + std::string(url) + "'");
    }
  }
  std::string_view rest = url.substr(colon + 3);

  if (const std::size_t hash = rest.find('#'); hash != std::string_view::npos) {
    p.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (const std::size_t q = rest.find('?'); q != std::string_view::npos) {
    p.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  const std::size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  p.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));

  if (const std::size_t at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (const std::size_t pc = authority.rfind(':'); pc != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    const std::string port(authority.substr(pc + 1));
    authority = authority.substr(0, pc);
    if (!port.empty()) {
      for (char c : port) {
        if (!std::isdigit(static_cast<unsigned char>(c))) throw FormatError("bad port in '" + std::string(url) + "'");
      }
      p.port = std::stoi(port);
    }
  }
  p.host = to_lower(authority);
  if (p.host.empty() && p.scheme != "file") throw FormatError("URL has no host: '" + std::string(url) + "'");
  for (char c : p.host) {
    if (std::isspace(static_cast<unsigned char>(c))) throw FormatError("bad host in '" + std::string(url) + "'");
  }
  return p;
}

bool is_tracking_parameter(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kExact = {"gclid", "fbclid", "msclkid", "mc_cid", "mc_eid", "ref",
                                                               "ref_src", "_ga", "igshid", "yclid", "dclid", "_hsenc"};
  const std::string lower = to_lower(name);
  if (lower.rfind("utm_", 0) == 0) return true;
  for (auto t : kExact) {
    if (lower == t) return true;
  }
  return false;
}

std::string canonical_url(std::string_view url) {
  const UrlParts p = split_url(url);
  std::string out = p.scheme + "://" + p.host;
  if (p.port != 0 && p.port != default_port(p.scheme)) out += ":" + std::to_string(p.port);
  std::string path = to_lower(p.path);
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  if (path == "/") path.clear();
  out += path;

  std::string query;
  std::size_t start = 0;
  while (start <= p.query.size() && !p.query.empty()) {
    std::size_t amp = p.query.find('&', start);
    if (amp == std::string::npos) amp = p.query.size();
    const std::string param = p.query.substr(start, amp - start);
    const std::string name = param.substr(0, param.find('='));
    if (!param.empty() && !is_tracking_parameter(name)) {
      if (!query.empty()) query += '&';
      query += param;
    }
    start = amp + 1;
  }
  if (!query.empty()) out += "?" + query;
  return out;
}

std::string document_id(std::string_view url) { return stable_hash(canonical_url(url)); }

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

}  // namespace recipemem::retrieval
