#include "recipemem/generation/screening.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "recipemem/core/text.hpp"

namespace recipemem::generation {
namespace {

// Phrases of someone asking for a recipe rather than giving one.
constexpr std::array<std::string_view, 9> kRequesterPhrases = {
    "i don't know how to make", "i do not know how to make", "i don't really know what it is",
    "i would like a walkthrough", "i would like a recipe",     "i'd like a recipe",
    "can you help me make",      "could you give me a",        "thanks in advance",
};

constexpr std::array<std::string_view, 7> kLetterMarkers = {
    "sincerely,", "best regards", "kind regards", "yours truly", "yours faithfully",
    "thank you for your letter", "thank you for your email",
};

std::string normalize(std::string_view s) {
  std::string out;
  bool space = false;
  for (unsigned char c : to_lower(s)) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(c));
  }
  // typographic apostrophe -> ASCII
  std::string fixed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.compare(i, 3, "\xE2\x80\x99") == 0) {
      fixed.push_back('\'');
      i += 2;
    } else {
      fixed.push_back(out[i]);
    }
  }
  return fixed;
}

}  // namespace

std::optional<std::string> detect_misunderstanding(std::string_view reply, std::string_view prompt) {
  const std::string r = normalize(reply);
  const std::string p = normalize(prompt);
  if (!p.empty() && r.rfind(p, 0) == 0) return "reply repeats the prompt as a prefix";

  const std::string head = r.substr(0, 300);
  for (auto phrase : kRequesterPhrases) {
    if (head.find(phrase) != std::string::npos) {
      return "reply speaks as the person asking (\"" + std::string(phrase) + "\")";
    }
  }
  if (head.rfind("dear ", 0) == 0) return "reply is styled as a letter (salutation)";
  for (auto marker : kLetterMarkers) {
    if (r.find(marker) != std::string::npos) return "reply is styled as a letter (\"" + std::string(marker) + "\")";
  }
  return std::nullopt;
}

std::string build_flaw_prompt(std::string_view recipe_name, std::string_view recipe_text) {
  std::string p;
  p += "You are reviewing a cooking recipe written by a language model.\n";
  p += "List every step or ingredient that is objectively wrong: it would not work, it is unsafe, or it "
       "contradicts how this dish is made. Ignore matters of taste and style.\n";
  p += "Write one line per problem in the form\n";
  p += "FLAW: <the step or ingredient> | <why it is wrong>\n";
  p += "If there are no such problems, answer exactly: NO FLAWS\n\n";
  p += "Recipe name: ";
  p += recipe_name;
  p += "\nRecipe:\n";
  p += recipe_text;
  p += "\n\nReview:\n";
  return p;
}

std::vector<std::string> parse_flaw_report(std::string_view reply) {
  std::vector<std::string> notes;
  for (const auto& raw : split_lines(reply)) {
    std::string line = trim(raw);
    while (!line.empty() && (line[0] == '-' || line[0] == '*')) line = trim(std::string_view(line).substr(1));
    if (line.size() > 5 && to_lower(line.substr(0, 5)) == "flaw:") {
      std::string note = trim(std::string_view(line).substr(5));
      if (!note.empty()) notes.push_back(std::move(note));
    }
  }
  return notes;
}

ScreenVerdict screen_recipe(const Candidate& candidate, const llm::Gateway& gateway, const ScreenOptions& options) {
  ScreenVerdict v;
  v.candidate_id = candidate.id();
  v.variant = candidate.variant;
  v.repetition = detect_repetition(candidate.text, options.repetition_threshold);
  if (auto reason = detect_misunderstanding(candidate.text, candidate.prompt)) {
    v.misunderstanding = true;
    v.misunderstanding_reason = *reason;
  }
  if (v.repetition.flagged || v.misunderstanding) {
    v.overall = Verdict::Reject;
    return v;
  }
  const auto reply = gateway.complete(
      {build_flaw_prompt(candidate.recipe, candidate.text), options.classifier_max_tokens, 0.0, 0,
       options.classifier_model});
  v.wrongness_notes = parse_flaw_report(reply.text);
  v.overall = Verdict::Pass;
  return v;
}

std::string build_preference_prompt(std::string_view recipe_name, std::string_view first, std::string_view second) {
  std::string p;
  p += "Two recipes for \"";
  p += recipe_name;
  p += "\" follow. Judge which one is more correct and which you would rather cook from.\n\n";
  p += "Recipe A:\n";
  p += first;
  p += "\n\nRecipe B:\n";
  p += second;
  p += "\n\nAnswer with a single letter, A or B.\nAnswer:";
  return p;
}

Selection select_best_of_k(std::vector<Candidate> candidates, const std::vector<ScreenVerdict>& verdicts,
                           const llm::Gateway& gateway, const std::string& judge_model) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.variant < b.variant; });

  auto verdict_of = [&](const Candidate& c) -> const ScreenVerdict* {
    for (const auto& v : verdicts) {
      if (v.candidate_id == c.id()) return &v;
    }
    return nullptr;
  };

  std::vector<std::pair<const Candidate*, std::size_t>> passing;  // candidate, fault count
  for (const auto& c : candidates) {
    const ScreenVerdict* v = verdict_of(c);
    if (v && v->overall == Verdict::Pass) passing.emplace_back(&c, v->wrongness_notes.size());
  }

  Selection sel;
  if (passing.empty()) {
    sel.reason = "excluded: none of " + std::to_string(candidates.size()) + " candidates passed screening";
    return sel;
  }

  std::size_t fewest = passing.front().second;
  for (const auto& p : passing) fewest = std::min(fewest, p.second);
  std::vector<const Candidate*> tied;
  for (const auto& p : passing) {
    if (p.second == fewest) tied.push_back(p.first);
  }

  const Candidate* best = tied.front();
  if (tied.size() == 1) {
    sel.reason = passing.size() == 1 ? "only passing candidate"
                                     : "fewest faulty steps (" + std::to_string(fewest) + ")";
  } else {
    sel.reason = "tie on faulty steps broken by pairwise preference";
    for (std::size_t i = 1; i < tied.size(); ++i) {
      const auto reply = gateway.complete(
          {build_preference_prompt(best->recipe, best->text, tied[i]->text), 4, 0.0, 0, judge_model});
      ++sel.judge_calls;
      const std::string answer = trim(reply.text);
      if (!answer.empty() && std::toupper(static_cast<unsigned char>(answer[0])) == 'B') best = tied[i];
      // anything but a clear "B" keeps the incumbent (lower variant index)
    }
  }
  sel.chosen = *best;
  return sel;
}

}  // namespace recipemem::generation
