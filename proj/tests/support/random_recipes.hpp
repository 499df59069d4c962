#pragma once

#include <random>
#include <string>
#include <vector>

#include "recipemem/core/types.hpp"

namespace recipemem::testing {

inline std::string random_phrase(std::mt19937_64& rng, int max_words = 3) {
  static const std::vector<std::string> words = {
      "flour", "salt", "egg", "large", "bowl", "crème", "fraîche", "pan", "whisk", "pour in", "A&B", "<tag>",
      "\"quoted\"", "it's", "svíčková", "sauce", "1/2", "oven", "chopped", "tomatoes", "knife", "mixture"};
  std::uniform_int_distribution<int> count(1, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::string out;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += words[pick(rng)];
  }
  return out;
}

// A GeneratedRecipe that passes validate_recipe: contiguous ordinals, no empty
// strings, propagated tools only where an earlier triple names the tool.
inline GeneratedRecipe random_recipe(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(1, 6);
  std::uniform_int_distribution<int> maybe(0, 2);
  GeneratedRecipe r;
  r.name.text = random_phrase(rng);
  if (maybe(rng) == 0) r.name.origin_tag = random_phrase(rng, 1);
  r.generator_id = maybe(rng) ? "mixtral-8x7b" : "";
  r.prompt_type = 1 + maybe(rng);
  r.variant = small(rng);
  if (maybe(rng)) r.raw_text = random_phrase(rng) + "\n\n- " + random_phrase(rng) + "\r\n\t" + random_phrase(rng);
  const int ingredients = small(rng);
  for (int i = 0; i < ingredients; ++i) r.ingredients.push_back({random_phrase(rng), i});
  const int tasks = small(rng);
  std::vector<std::string> seen_tools;
  for (int t = 0; t < tasks; ++t) {
    TaskTriple triple;
    triple.action = random_phrase(rng, 2);
    triple.ordinal = t;
    const int tools = maybe(rng);
    for (int k = 0; k < tools; ++k) triple.tools.push_back({random_phrase(rng, 2), false});
    if (!seen_tools.empty() && maybe(rng) == 0) triple.tools.push_back({seen_tools.front(), true});
    const int used = maybe(rng) + 1;
    for (int k = 0; k < used; ++k) triple.ingredients.push_back(r.ingredients[k % ingredients].name);
    for (const auto& tool : triple.tools) seen_tools.push_back(tool.name);
    r.tasks.push_back(std::move(triple));
  }
  return r;
}

}  // namespace recipemem::testing
