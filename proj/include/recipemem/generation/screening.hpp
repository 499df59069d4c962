#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recipemem/generation/generator.hpp"
#include "recipemem/generation/repetition.hpp"
#include "recipemem/llm/gateway.hpp"

namespace recipemem::generation {

enum class Verdict { Pass, Reject };

struct ScreenVerdict {
  std::string candidate_id;
  int variant = 0;
  RepetitionResult repetition;
  bool misunderstanding = false;
  std::string misunderstanding_reason;
  std::vector<std::string> wrongness_notes;  // one per objectively faulty step or ingredient
  Verdict overall = Verdict::Pass;
};

struct ScreenOptions {
  int repetition_threshold = kDefaultRepetitionThreshold;
  std::string classifier_model;
  int classifier_max_tokens = 512;
};

// Detects replies that treat the prompt as a prefix to continue, speak as the
// person asking, or are styled as a letter. Returns the reason when flagged.
std::optional<std::string> detect_misunderstanding(std::string_view reply, std::string_view prompt);

std::string build_flaw_prompt(std::string_view recipe_name, std::string_view recipe_text);

// Lines of the form "FLAW: <item> | <reason>" become notes; anything else is ignored.
std::vector<std::string> parse_flaw_report(std::string_view reply);

// Repetition and misunderstanding reject outright (the classifier is then not
// called); otherwise the LLM classifier lists objectively wrong steps, which
// feed best-of-K selection. Gateway errors propagate.
ScreenVerdict screen_recipe(const Candidate& candidate, const llm::Gateway& gateway, const ScreenOptions& options);

struct Selection {
  std::optional<Candidate> chosen;
  std::string reason;  // why it was chosen, or why the recipe is excluded
  int judge_calls = 0;
};

std::string build_preference_prompt(std::string_view recipe_name, std::string_view first, std::string_view second);

// Among Pass candidates: fewest wrongness notes, then pairwise LLM preference
// (candidates in variant order, incumbent vs challenger), then lowest variant.
// No Pass candidate excludes the recipe with a recorded reason.
Selection select_best_of_k(std::vector<Candidate> candidates, const std::vector<ScreenVerdict>& verdicts,
                           const llm::Gateway& gateway, const std::string& judge_model);

}  // namespace recipemem::generation
