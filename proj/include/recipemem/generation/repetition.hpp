#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace recipemem::generation {

inline constexpr int kDefaultRepetitionThreshold = 6;

struct RepetitionResult {
  bool flagged = false;
  // 1-based inclusive line numbers of the longest same-template run (0 when none).
  int start_line = 0;
  int end_line = 0;
  int run_length = 0;  // non-blank lines in the run
};

// Template of one line: list markers stripped, lowercased, punctuation trimmed
// from words, quantities ("2", "1/2", "1.5", "2-3", "½") masked as "#".
std::vector<std::string> line_template(std::string_view line);

// Flags runs of at least `threshold` consecutive non-blank lines that share a
// template once quantities and their trailing noun phrase are masked. Lines
// share a template when their masked words have a common prefix (the stem) of
// at least three words that also covers at least half of every line in the run;
// the words after the stem are the varying noun phrase. Pure and deterministic.
RepetitionResult detect_repetition(std::string_view text, int threshold = kDefaultRepetitionThreshold);

}  // namespace recipemem::generation
