#include "recipemem/generation/repetition.hpp"

#include <algorithm>
#include <cctype>

#include "recipemem/core/text.hpp"

namespace recipemem::generation {
namespace {

constexpr std::size_t kMinStem = 3;

bool is_quantity(std::string_view w) {
  // UTF-8 vulgar fractions U+00BC..U+00BE and U+2150..U+215E
  if (w.rfind("\xC2\xBC", 0) == 0 || w.rfind("\xC2\xBD", 0) == 0 || w.rfind("\xC2\xBE", 0) == 0) return true;
  if (w.size() >= 3 && static_cast<unsigned char>(w[0]) == 0xE2 && static_cast<unsigned char>(w[1]) == 0x85) {
    return true;
  }
  bool digit = false;
  for (char c : w) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '/' && c != '.' && c != '-' && c != ',') {
      return false;
    }
  }
  return digit;
}

std::string strip_marker(std::string_view line) {
  std::string s = trim(line);
  // bullets: "-", "*", "+", "•"
  if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+')) return trim(std::string_view(s).substr(1));
  if (s.rfind("\xE2\x80\xA2", 0) == 0) return trim(std::string_view(s).substr(3));
  // "12." "3)" "(4)"
  std::size_t i = 0;
  const bool paren = !s.empty() && s[0] == '(';
  if (paren) ++i;
  const std::size_t digits_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > digits_start && i < s.size() && (s[i] == '.' || s[i] == ')') && i + 1 < s.size() &&
      std::isspace(static_cast<unsigned char>(s[i + 1]))) {
    return trim(std::string_view(s).substr(i + 1));
  }
  return s;
}

std::size_t common_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t cap) {
  std::size_t n = 0;
  const std::size_t limit = std::min({a.size(), b.size(), cap});
  while (n < limit && a[n] == b[n]) ++n;
  return n;
}

}  // namespace

std::vector<std::string> line_template(std::string_view line) {
  std::vector<std::string> out;
  for (auto& raw : split_words(to_lower(strip_marker(line)))) {
    std::size_t b = 0, e = raw.size();
    auto punct = [](char c) {
      return std::ispunct(static_cast<unsigned char>(c)) && c != '/' && c != '%';
    };
    while (b < e && punct(raw[b])) ++b;
    while (e > b && punct(raw[e - 1])) --e;
    if (b == e) continue;
    std::string w = raw.substr(b, e - b);
    out.push_back(is_quantity(w) ? "#" : std::move(w));
  }
  return out;
}

RepetitionResult detect_repetition(std::string_view text, int threshold) {
  struct Line {
    int number;
    std::vector<std::string> words;
  };
  std::vector<Line> lines;
  int number = 0;
  for (const auto& raw : split_lines(text)) {
    ++number;
    auto words = line_template(raw);
    if (!words.empty()) lines.push_back({number, std::move(words)});
  }

  RepetitionResult best;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t stem = lines[i].words.size();
    std::size_t longest = lines[i].words.size();
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      const std::size_t next_stem = common_prefix(lines[i].words, lines[j].words, stem);
      const std::size_t next_longest = std::max(longest, lines[j].words.size());
      if (next_stem < kMinStem || 2 * next_stem < next_longest) break;
      stem = next_stem;
      longest = next_longest;
    }
    const int run = static_cast<int>(j - i);
    if (run > 1 && run > best.run_length) {
      best.run_length = run;
      best.start_line = lines[i].number;
      best.end_line = lines[j - 1].number;
    }
  }
  best.flagged = best.run_length >= threshold;
  return best;
}

}  // namespace recipemem::generation
