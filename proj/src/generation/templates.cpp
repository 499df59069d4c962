#include "recipemem/generation/templates.hpp"

#include <json.hpp>

#include "recipemem/core/error.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::generation {
namespace {

constexpr std::string_view kDefaultTemplates = R"({
  "version": 1,
  "types": [
    {"type_id": 1, "label": "General",
     "variants": ["How do you make [recipe name]", "Give me a recipe for [recipe name]"]},
    {"type_id": 2, "label": "More detail",
     "variants": ["Give me a detailed and thorough walkthrough to making [recipe name]",
                  "Give me a detailed guide to making [recipe name]"]},
    {"type_id": 3, "label": "Less detail",
     "variants": ["Give me a rough and short guide to making [recipe name]",
                  "Roughly how do you make [recipe name]?"]},
    {"type_id": 4, "label": "Include origin",
     "variants": ["What is the origin of [recipe name]? How do you make it?",
                  "Where does [recipe name] come from? And how is it made?"]},
    {"type_id": 5, "label": "Freestyle",
     "variants": ["[recipe name]"]}
  ]
})";

std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kRecipePlaceholder); pos != std::string_view::npos;
       pos = text.find(kRecipePlaceholder, pos + kRecipePlaceholder.size())) {
    ++n;
  }
  return n;
}

}  // namespace

void validate_template(const PromptTemplate& tpl) {
  const std::string where = "prompt type " + std::to_string(tpl.type_id);
  if (tpl.type_id < 1 || tpl.type_id > 5) throw ConfigError(where + ": type_id must be in 1..5");
  if (tpl.variants.empty()) throw ConfigError(where + ": no variants");
  for (std::size_t i = 0; i < tpl.variants.size(); ++i) {
    const auto n = count_placeholders(tpl.variants[i]);
    if (n != 1) {
      throw ConfigError(where + " variant " + std::to_string(i) + ": placeholder " +
                        std::string(kRecipePlaceholder) + " must occur exactly once, found " + std::to_string(n));
    }
  }
}

std::string render_prompt(const PromptTemplate& tpl, const RecipeName& name, std::size_t variant_index) {
  if (variant_index >= tpl.variants.size()) {
    throw PreconditionError("variant index " + std::to_string(variant_index) + " out of range for prompt type " +
                            std::to_string(tpl.type_id));
  }
  std::string out = tpl.variants[variant_index];
  const auto pos = out.find(kRecipePlaceholder);
  if (pos == std::string::npos) throw ConfigError("template variant has no placeholder");
  out.replace(pos, kRecipePlaceholder.size(), name.text);
  return out;
}

TemplateSet TemplateSet::defaults() { return parse(kDefaultTemplates); }

TemplateSet TemplateSet::parse(std::string_view json_text) {
  TemplateSet set;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& t : doc.at("types")) {
      PromptTemplate tpl;
      tpl.type_id = t.at("type_id").get<int>();
      tpl.label = t.value("label", "");
      tpl.variants = t.at("variants").get<std::vector<std::string>>();
      validate_template(tpl);
      if (!set.types_.emplace(tpl.type_id, tpl).second) {
        throw ConfigError("duplicate prompt type " + std::to_string(tpl.type_id));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("template file: ") + e.what());
  }
  return set;
}

TemplateSet TemplateSet::load(const std::string& path) { return parse(read_file(path)); }

const PromptTemplate& TemplateSet::get(int type_id) const {
  auto it = types_.find(type_id);
  if (it == types_.end()) throw ConfigError("no prompt template of type " + std::to_string(type_id));
  return it->second;
}

}  // namespace recipemem::generation
