#include "recipemem/parser/recipe_xml.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

#include "recipemem/core/text.hpp"

namespace recipemem::parser {

namespace pt = boost::property_tree;

namespace {

std::string escape(std::string_view s, bool attribute) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += attribute ? "&quot;" : "\""; break;
      case '\n': out += attribute ? "&#10;" : "\n"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += attribute ? "&#9;" : "\t"; break;
      default: out += c;
    }
  }
  return out;
}

void write_lists(std::ostringstream& os, const std::vector<IngredientMention>& ingredients,
                 const std::vector<TaskTriple>& tasks) {
  os << "  <ingredients>\n";
  for (const auto& m : ingredients) os << "    <ingredient>" << escape(m.name, false) << "</ingredient>\n";
  os << "  </ingredients>\n";
  os << "  <tasks>\n";
  for (const auto& t : tasks) {
    os << "    <task>\n";
    os << "      <name>" << escape(t.action, false) << "</name>\n";
    for (const auto& tool : t.tools) {
      os << (tool.propagated ? "      <tool propagated=\"true\">" : "      <tool>") << escape(tool.name, false)
         << "</tool>\n";
    }
    for (const auto& i : t.ingredients) os << "      <ingredient>" << escape(i, false) << "</ingredient>\n";
    os << "    </task>\n";
  }
  os << "  </tasks>\n";
}

bool is_meta(const std::string& key) { return key == "<xmlattr>" || key == "<xmlcomment>"; }

void require_no_text(const pt::ptree& node, const std::string& element) {
  if (!trim(node.data()).empty()) throw XmlSchemaError(element, "unexpected text '" + trim(node.data()) + "'");
  for (const auto& [key, child] : node) {
    if (key == "<xmltext>" && !trim(child.data()).empty()) {
      throw XmlSchemaError(element, "unexpected text '" + trim(child.data()) + "'");
    }
  }
}

// Text content of a leaf element; nested elements are schema violations.
std::string leaf_text(const pt::ptree& node, const std::string& element) {
  for (const auto& [key, child] : node) {
    if (!is_meta(key) && key != "<xmltext>") throw XmlSchemaError(element, "unexpected child <" + key + ">");
  }
  return trim(node.data());
}

std::string attr(const pt::ptree& node, const std::string& name) {
  auto attrs = node.get_child_optional("<xmlattr>");
  if (!attrs) return {};
  return attrs->get<std::string>(name, "");
}

bool has_attr(const pt::ptree& node, const std::string& name) {
  auto attrs = node.get_child_optional("<xmlattr>");
  return attrs && attrs->get_child_optional(name);
}

TaskTriple parse_task(const pt::ptree& node, int ordinal) {
  TaskTriple t;
  t.ordinal = ordinal;
  int names = 0;
  for (const auto& [key, child] : node) {
    if (is_meta(key) || key == "<xmltext>") continue;
    if (key == "name") {
      ++names;
      t.action = leaf_text(child, "name");
    } else if (key == "tool") {
      std::string text = leaf_text(child, "tool");
      const std::string flag = attr(child, "propagated");
      if (!flag.empty() && flag != "true" && flag != "false") {
        throw XmlSchemaError("tool", "propagated must be true or false, got '" + flag + "'");
      }
      if (!text.empty()) t.tools.push_back({std::move(text), flag == "true"});
    } else if (key == "ingredient") {
      std::string text = leaf_text(child, "ingredient");
      if (!text.empty()) t.ingredients.push_back(std::move(text));
    } else {
      throw XmlSchemaError(key, "not allowed inside <task>");
    }
  }
  require_no_text(node, "task");
  if (names != 1) {
    throw XmlSchemaError("task", "task " + std::to_string(ordinal) + " has " + std::to_string(names) +
                                    " <name> elements, expected 1");
  }
  return t;
}

RecipeLists parse_body(const pt::ptree& root) {
  RecipeLists lists;
  int ingredient_blocks = 0;
  int task_blocks = 0;
  for (const auto& [key, child] : root) {
    if (is_meta(key) || key == "<xmltext>") continue;
    if (key == "ingredients") {
      ++ingredient_blocks;
      require_no_text(child, "ingredients");
      for (const auto& [k, item] : child) {
        if (is_meta(k) || k == "<xmltext>") continue;
        if (k != "ingredient") throw XmlSchemaError(k, "not allowed inside <ingredients>");
        std::string text = leaf_text(item, "ingredient");
        if (text.empty()) continue;
        lists.ingredients.push_back({std::move(text), static_cast<int>(lists.ingredients.size())});
      }
    } else if (key == "tasks") {
      ++task_blocks;
      require_no_text(child, "tasks");
      for (const auto& [k, item] : child) {
        if (is_meta(k) || k == "<xmltext>") continue;
        if (k != "task") throw XmlSchemaError(k, "not allowed inside <tasks>");
        lists.tasks.push_back(parse_task(item, static_cast<int>(lists.tasks.size())));
      }
    } else {
      throw XmlSchemaError(key, "not allowed inside <recipe>");
    }
  }
  require_no_text(root, "recipe");
  if (ingredient_blocks != 1) {
    throw XmlSchemaError("ingredients", "expected exactly one block, found " + std::to_string(ingredient_blocks));
  }
  if (task_blocks != 1) {
    throw XmlSchemaError("tasks", "expected exactly one block, found " + std::to_string(task_blocks));
  }
  return lists;
}

const pt::ptree& read_root(std::string_view xml, pt::ptree& doc) {
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw FormatError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }
  const pt::ptree* root = nullptr;
  for (const auto& [key, child] : doc) {
    if (key == "<xmlcomment>") continue;
    if (key != "recipe") throw XmlSchemaError(key, "root element must be <recipe>");
    if (root) throw XmlSchemaError("recipe", "more than one root element");
    root = &child;
  }
  if (!root) throw XmlSchemaError("recipe", "missing root element");
  return *root;
}

int int_attr(const pt::ptree& node, const std::string& name, int fallback) {
  const std::string v = attr(node, name);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return parsed;
  } catch (const std::exception&) {
    throw XmlSchemaError("recipe", "attribute " + name + " is not an integer: '" + v + "'");
  }
}

}  // namespace

std::string serialize_recipe_xml(const GeneratedRecipe& recipe) {
  std::ostringstream os;
  os << "<recipe name=\"" << escape(recipe.name.text, true) << "\"";
  if (recipe.name.origin_tag) os << " origin=\"" << escape(*recipe.name.origin_tag, true) << "\"";
  if (!recipe.generator_id.empty()) os << " generator=\"" << escape(recipe.generator_id, true) << "\"";
  os << " prompt-type=\"" << recipe.prompt_type << "\" variant=\"" << recipe.variant << "\"";
  if (!recipe.raw_text.empty()) os << " source=\"" << escape(recipe.raw_text, true) << "\"";
  os << ">\n";
  write_lists(os, recipe.ingredients, recipe.tasks);
  os << "</recipe>\n";
  return os.str();
}

std::string serialize_lists_xml(const RecipeLists& lists) {
  std::ostringstream os;
  os << "<recipe>\n";
  write_lists(os, lists.ingredients, lists.tasks);
  os << "</recipe>\n";
  return os.str();
}

RecipeLists parse_lists_xml(std::string_view xml) {
  pt::ptree doc;
  return parse_body(read_root(xml, doc));
}

GeneratedRecipe parse_recipe_xml(std::string_view xml) {
  pt::ptree doc;
  const pt::ptree& root = read_root(xml, doc);
  RecipeLists lists = parse_body(root);
  GeneratedRecipe r;
  r.name.text = attr(root, "name");
  if (has_attr(root, "origin")) r.name.origin_tag = attr(root, "origin");
  r.generator_id = attr(root, "generator");
  r.prompt_type = int_attr(root, "prompt-type", 2);
  r.variant = int_attr(root, "variant", 1);
  r.raw_text = attr(root, "source");
  r.ingredients = std::move(lists.ingredients);
  r.tasks = std::move(lists.tasks);
  return r;
}

std::string locate_recipe_xml(std::string_view reply) {
  std::size_t start = std::string_view::npos;
  for (std::size_t pos = reply.find("<recipe"); pos != std::string_view::npos; pos = reply.find("<recipe", pos + 1)) {
    const std::size_t after = pos + 7;
    if (after < reply.size() && (reply[after] == '>' || reply[after] == '/' || std::isspace(static_cast<unsigned char>(reply[after])))) {
      start = pos;
      break;
    }
  }
  if (start == std::string_view::npos) throw FormatError("reply contains no <recipe> element");
  constexpr std::string_view close = "</recipe>";
  const std::size_t end = reply.rfind(close);
  if (end == std::string_view::npos || end < start) {
    // a self-closing root is still a complete element
    const std::size_t gt = reply.find('>', start);
    if (gt != std::string_view::npos && reply[gt - 1] == '/') return std::string(reply.substr(start, gt + 1 - start));
    throw FormatError("<recipe> element is not closed");
  }
  return std::string(reply.substr(start, end + close.size() - start));
}

}  // namespace recipemem::parser
