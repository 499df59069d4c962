#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recipemem/core/types.hpp"

namespace recipemem::generation {

inline constexpr std::string_view kRecipePlaceholder = "[recipe name]";

struct PromptTemplate {
  int type_id = 0;
  std::string label;  // "General", "More detail", ...
  std::vector<std::string> variants;
};

// Throws ConfigError unless type_id is 1..5, there is at least one variant and
// every variant contains the placeholder exactly once.
void validate_template(const PromptTemplate& tpl);

// Substitutes the placeholder verbatim; nothing else in the variant changes.
std::string render_prompt(const PromptTemplate& tpl, const RecipeName& name, std::size_t variant_index);

class TemplateSet {
 public:
  // The five prompt types (General, More detail, Less detail, Include origin, Freestyle).
  static TemplateSet defaults();
  // JSON: {"types":[{"type_id":1,"label":"General","variants":["..."]}, ...]}
  static TemplateSet parse(std::string_view json_text);
  static TemplateSet load(const std::string& path);

  const PromptTemplate& get(int type_id) const;
  const std::map<int, PromptTemplate>& all() const { return types_; }

 private:
  std::map<int, PromptTemplate> types_;
};

}  // namespace recipemem::generation
