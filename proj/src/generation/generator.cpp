#include "recipemem/generation/generator.hpp"

#include <algorithm>
#include <future>

#include "recipemem/core/error.hpp"

namespace recipemem::generation {

void validate(const StudyConfig& config) {
  if (config.k < 1) throw ConfigError("K must be >= 1");
  if (config.prompt_type < 1 || config.prompt_type > 5) throw ConfigError("prompt type must be in 1..5");
  for (const auto& s : config.selected) {
    const bool known = std::any_of(config.recipe_names.begin(), config.recipe_names.end(),
                                   [&](const RecipeName& n) { return n.text == s.text; });
    if (!known) throw ConfigError("selected recipe '" + s.text + "' is not in the candidate pool");
  }
}

CandidateBatch generate_k(const RecipeName& name, const StudyConfig& config, const TemplateSet& templates,
                          const llm::Gateway& gateway) {
  validate(config);
  const PromptTemplate& tpl = templates.get(config.prompt_type);

  std::vector<std::future<Candidate>> pending;
  for (int v = 1; v <= config.k; ++v) {
    pending.push_back(std::async(std::launch::async, [&, v] {
      Candidate c;
      c.recipe = name.text;
      c.variant = v;
      c.prompt_type = config.prompt_type;
      c.prompt = render_prompt(tpl, name, static_cast<std::size_t>(v - 1) % tpl.variants.size());
      c.generator_id = config.model_id;
      const auto reply =
          gateway.complete({c.prompt, config.max_tokens, config.temperature, config.seed + v, config.model_id});
      c.text = reply.text;
      c.hit_length_limit = reply.finish == llm::FinishReason::LengthLimit;
      return c;
    }));
  }

  CandidateBatch batch;
  for (int v = 1; v <= config.k; ++v) {
    try {
      batch.candidates.push_back(pending[v - 1].get());
    } catch (const std::exception& e) {
      batch.failures.push_back({name.text, v, e.what()});
    }
  }
  if (batch.candidates.empty()) {
    throw StageError("all " + std::to_string(config.k) + " generations failed for '" + name.text +
                     "': " + batch.failures.front().error);
  }
  return batch;
}

}  // namespace recipemem::generation
