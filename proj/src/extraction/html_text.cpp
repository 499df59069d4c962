#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string>

#include "recipemem/core/text.hpp"
#include "recipemem/extraction/document.hpp"

namespace recipemem::extraction {

namespace {

const std::set<std::string>& skipped_elements() {
  static const std::set<std::string> s = {"script", "style", "noscript", "template", "svg", "head", "iframe", "object"};
  return s;
}

const std::set<std::string>& block_elements() {
  static const std::set<std::string> s = {
      "address", "article", "aside", "blockquote", "body", "br", "dd", "details", "div", "dl", "dt",
      "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
      "header", "hr", "html", "li", "main", "nav", "ol", "p", "pre", "section", "summary", "table",
      "tbody", "thead", "tfoot", "tr", "ul", "option", "caption", "label", "button"};
  return s;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp == 0xA0) cp = ' ';
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

const std::map<std::string, unsigned long>& named_entities() {
  static const std::map<std::string, unsigned long> m = {
      {"amp", '&'},      {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
      {"nbsp", 0xA0},    {"frac12", 0xBD},   {"frac14", 0xBC},   {"frac34", 0xBE},   {"frac13", 0x2153},
      {"frac23", 0x2154}, {"deg", 0xB0},     {"ndash", 0x2013},  {"mdash", 0x2014},  {"hellip", 0x2026},
      {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"ldquo", 0x201C},  {"rdquo", 0x201D},  {"times", 0xD7},
      {"copy", 0xA9},    {"reg", 0xAE},      {"trade", 0x2122},  {"eacute", 0xE9},   {"egrave", 0xE8},
      {"agrave", 0xE0},  {"aacute", 0xE1},   {"iacute", 0xED},   {"oacute", 0xF3},   {"uacute", 0xFA},
      {"ntilde", 0xF1},  {"ccedil", 0xE7},   {"uuml", 0xFC},     {"ouml", 0xF6},     {"auml", 0xE4},
      {"szlig", 0xDF},   {"middot", 0xB7},   {"bull", 0x2022},   {"laquo", 0xAB},    {"raquo", 0xBB}};
  return m;
}

// Decodes the entity starting at html[i] == '&'; returns characters consumed (0 = not an entity).
std::size_t decode_entity(std::string_view html, std::size_t i, std::string& out) {
  const std::size_t semi = html.find(';', i);
  if (semi == std::string_view::npos || semi - i > 12) return 0;
  const std::string_view body = html.substr(i + 1, semi - i - 1);
  if (body.empty()) return 0;
  if (body[0] == '#') {
    unsigned long cp = 0;
    const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    const std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      if (hex ? !std::isxdigit(static_cast<unsigned char>(c)) : !std::isdigit(static_cast<unsigned char>(c))) return 0;
    }
    cp = std::stoul(std::string(digits), nullptr, hex ? 16 : 10);
    append_utf8(out, cp);
    return semi - i + 1;
  }
  auto it = named_entities().find(std::string(body));
  if (it == named_entities().end()) return 0;
  append_utf8(out, it->second);
  return semi - i + 1;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) {
      match = std::tolower(static_cast<unsigned char>(hay[i + k])) == needle[k];
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

// End of a tag starting at '<', honouring quoted attribute values.
std::size_t tag_end(std::string_view html, std::size_t i) {
  char quote = 0;
  for (std::size_t k = i + 1; k < html.size(); ++k) {
    const char c = html[k];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return k;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string raw;  // text with '\n' at block boundaries
  raw.reserve(html.size() / 2);
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '&') {
      if (const std::size_t used = decode_entity(html, i, raw)) {
        i += used;
        continue;
      }
      raw += c;
      ++i;
      continue;
    }
    if (c != '<') {
      if (c == '\n' || c == '\r' || c == '\t' || c == '\f') {
        raw += ' ';
      } else if (static_cast<unsigned char>(c) == 0xC2 && i + 1 < html.size() &&
                 static_cast<unsigned char>(html[i + 1]) == 0xA0) {
        raw += ' ';
        ++i;
      } else {
        raw += c;
      }
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const std::size_t end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    std::size_t k = i + 1;
    const bool closing = k < html.size() && html[k] == '/';
    if (closing) ++k;
    std::string name;
    while (k < html.size() && (std::isalnum(static_cast<unsigned char>(html[k])) || html[k] == '-')) {
      name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[k])));
      ++k;
    }
    if (name.empty() && !(k < html.size() && (html[k] == '!' || html[k] == '?'))) {
      raw += c;  // a bare '<' in text
      ++i;
      continue;
    }
    const std::size_t end = tag_end(html, i);
    if (end == std::string_view::npos) break;
    const bool self_closing = end > i && html[end - 1] == '/';
    i = end + 1;
    if (name.empty()) continue;  // doctype, processing instruction
    if (!closing && !self_closing && skipped_elements().count(name)) {
      const std::size_t close = find_ci(html, "</" + name, i);
      if (close == std::string_view::npos) {
        if (name == "head") continue;  // unclosed head: keep what follows
        break;
      }
      const std::size_t close_end = tag_end(html, close);
      i = close_end == std::string_view::npos ? html.size() : close_end + 1;
      continue;
    }
    if (block_elements().count(name)) {
      raw += '\n';
    } else if (name == "td" || name == "th") {
      raw += ' ';
    }
  }

  std::string out;
  for (const auto& line : split_lines(raw)) {
    std::string collapsed;
    bool space = false;
    for (char ch : line) {
      if (ch == ' ') {
        space = true;
        continue;
      }
      if (space && !collapsed.empty()) collapsed += ' ';
      space = false;
      collapsed += ch;
    }
    if (collapsed.empty()) continue;
    if (!out.empty()) out += '\n';
    out += collapsed;
  }
  return out;
}

}  // namespace recipemem::extraction
