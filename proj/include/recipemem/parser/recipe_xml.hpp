#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "recipemem/core/error.hpp"
#include "recipemem/core/types.hpp"

namespace recipemem::parser {

// Schema violation; the message names the offending element.
class XmlSchemaError : public FormatError {
 public:
  XmlSchemaError(std::string element, const std::string& message)
      : FormatError("<" + element + ">: " + message), element_(std::move(element)) {}
  const std::string& element() const { return element_; }

 private:
  std::string element_;
};

// Raw XML text that passed the schema checks at least once.
struct RecipeXml {
  std::string raw_xml;
};

// Lists carried by the shared schema, ordinals assigned by document order.
struct RecipeLists {
  std::vector<IngredientMention> ingredients;
  std::vector<TaskTriple> tasks;
};

// Root attributes (name, origin, generator, prompt-type, variant, source) are
// optional; extraction replies normally carry none of them.
std::string serialize_recipe_xml(const GeneratedRecipe& recipe);
std::string serialize_lists_xml(const RecipeLists& lists);

// Empty tool and ingredient elements are dropped, other text is trimmed.
// Throws XmlSchemaError (or FormatError for XML that is not well-formed).
GeneratedRecipe parse_recipe_xml(std::string_view xml);
RecipeLists parse_lists_xml(std::string_view xml);

// Cuts the <recipe>...</recipe> element out of an LLM reply (code fences,
// prose before or after). Throws FormatError when there is none.
std::string locate_recipe_xml(std::string_view reply);

}  // namespace recipemem::parser
