#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recipemem/core/types.hpp"
#include "recipemem/generation/templates.hpp"
#include "recipemem/llm/gateway.hpp"

namespace recipemem::generation {

struct StudyConfig {
  std::vector<RecipeName> recipe_names;  // candidate pool
  std::vector<RecipeName> selected;      // subset actually studied
  int k = 5;
  int prompt_type = 2;  // the winning type was never published; "More detail" is a guess
  std::string model_id;
  int max_tokens = 2048;
  double temperature = 0.7;
  std::int64_t seed = 0;
};

// Throws ConfigError when K < 1, the prompt type is out of range, or a
// selected name is not in the pool.
void validate(const StudyConfig& config);

struct Candidate {
  std::string recipe;
  int variant = 1;  // 1..K
  int prompt_type = 2;
  std::string prompt;
  std::string text;
  bool hit_length_limit = false;
  std::string generator_id;

  std::string id() const { return recipe + "#" + std::to_string(variant); }
};

struct GenerationFailure {
  std::string recipe;
  int variant = 0;
  std::string error;
};

struct CandidateBatch {
  std::vector<Candidate> candidates;  // ordered by variant
  std::vector<GenerationFailure> failures;
};

// K concurrent calls; variant v renders template variant (v-1) mod n with
// seed = config.seed + v. Throws StageError only when every call fails.
CandidateBatch generate_k(const RecipeName& name, const StudyConfig& config, const TemplateSet& templates,
                          const llm::Gateway& gateway);

}  // namespace recipemem::generation
