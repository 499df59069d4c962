#include "recipemem/parser/extract.hpp"

#include <algorithm>
#include <set>

#include "recipemem/core/text.hpp"

namespace recipemem::parser {

namespace {

constexpr std::string_view kSchemaDescription =
    "Answer with XML only, using exactly these elements:\n"
    "<recipe>\n"
    "  <ingredients>\n"
    "    <ingredient>...</ingredient>\n"
    "  </ingredients>\n"
    "  <tasks>\n"
    "    <task>\n"
    "      <name>...</name>\n"
    "      <tool>...</tool>\n"
    "      <ingredient>...</ingredient>\n"
    "    </task>\n"
    "  </tasks>\n"
    "</recipe>\n"
    "Every task has exactly one <name>. <tool> and <ingredient> inside a task are optional and may repeat.\n";

constexpr std::string_view kRecipeExample =
    "Example input:\n"
    "Mix the flour and salt in a large mixing bowl. Whisk in the eggs. Pour the mixture into a greased pan.\n"
    "Example output:\n"
    "<recipe>\n"
    "  <ingredients>\n"
    "    <ingredient>flour</ingredient>\n"
    "    <ingredient>salt</ingredient>\n"
    "    <ingredient>eggs</ingredient>\n"
    "  </ingredients>\n"
    "  <tasks>\n"
    "    <task><name>mix</name><tool>mixing bowl</tool><ingredient>flour</ingredient>"
    "<ingredient>salt</ingredient></task>\n"
    "    <task><name>whisk in</name><ingredient>eggs</ingredient></task>\n"
    "    <task><name>pour</name><tool>pan</tool><ingredient>mixture</ingredient></task>\n"
    "  </tasks>\n"
    "</recipe>\n";

std::string normalized(std::string_view s) { return to_lower(trim(s)); }

}  // namespace

std::string build_repair_prompt(const std::string& prompt, std::string_view bad_reply, std::string_view error) {
  std::string p = prompt;
  p += "\n\nYour previous answer was:\n";
  p += bad_reply;
  p += "\n\nIt could not be parsed: ";
  p += error;
  p += "\nReturn the corrected XML and nothing else.\n";
  return p;
}

XmlExtraction extract_xml_with_repair(const std::string& prompt, const llm::Gateway& gateway,
                                      const ExtractOptions& options) {
  std::string current = prompt;
  std::string last_reply;
  std::string last_error;
  for (int attempt = 0; attempt <= options.repair_attempts; ++attempt) {
    const auto reply = gateway.complete({current, options.max_tokens, 0.0, 0, options.model_id});
    last_reply = reply.text;
    try {
      XmlExtraction out;
      out.xml.raw_xml = locate_recipe_xml(reply.text);
      out.lists = parse_lists_xml(out.xml.raw_xml);
      out.repairs = attempt;
      return out;
    } catch (const FormatError& e) {
      last_error = e.what();
      current = build_repair_prompt(prompt, reply.text, last_error);
    }
  }
  throw ExtractionError("no schema-valid XML after " + std::to_string(options.repair_attempts + 1) +
                            " attempts: " + last_error,
                        last_reply);
}

std::string build_recipe_extraction_prompt(std::string_view recipe_text) {
  std::string p;
  p += "Extract the ingredient list and the list of tasks from the recipe below.\n";
  p += "A task is one action performed while cooking. Name it with the bare verb phrase in the infinitive "
       "(\"whisk\", \"pour in\"). List the tools used for it and the ingredients it involves. When a step works "
       "on several earlier ingredients together, use the word the recipe itself uses for them (for example "
       "\"mixture\" or \"dough\") as a single ingredient.\n";
  p += kSchemaDescription;
  p += "\n";
  p += kRecipeExample;
  p += "\nRecipe:\n";
  p += recipe_text;
  p += "\n\nXML:\n";
  return p;
}

XmlExtraction extract_structured(std::string_view recipe_text, const llm::Gateway& gateway,
                                 const ExtractOptions& options) {
  if (trim(recipe_text).empty()) throw PreconditionError("recipe text is empty");
  return extract_xml_with_repair(build_recipe_extraction_prompt(recipe_text), gateway, options);
}

std::string tool_category(std::string_view tool) {
  const auto words = split_words(to_lower(tool));
  return words.empty() ? std::string() : words.back();
}

std::vector<TaskTriple> propagate_tools(std::vector<TaskTriple> tasks) {
  const std::vector<TaskTriple> original = tasks;
  for (std::size_t i = 0; i < original.size(); ++i) {
    std::set<std::string> source_ingredients;
    for (const auto& ing : original[i].ingredients) source_ingredients.insert(normalized(ing));
    for (const auto& tool : original[i].tools) {
      if (tool.propagated) continue;
      const std::string category = tool_category(tool.name);
      for (std::size_t j = i + 1; j < original.size(); ++j) {
        const bool replaced = std::any_of(original[j].tools.begin(), original[j].tools.end(), [&](const Tool& t) {
          return !t.propagated && tool_category(t.name) == category;
        });
        if (replaced) break;
        const bool shares = std::any_of(original[j].ingredients.begin(), original[j].ingredients.end(),
                                        [&](const std::string& ing) { return source_ingredients.count(normalized(ing)); });
        if (!shares) continue;
        auto& tools = tasks[j].tools;
        const bool present = std::any_of(tools.begin(), tools.end(),
                                         [&](const Tool& t) { return normalized(t.name) == normalized(tool.name); });
        if (!present) tools.push_back({tool.name, true});
      }
    }
  }
  return tasks;
}

}  // namespace recipemem::parser
