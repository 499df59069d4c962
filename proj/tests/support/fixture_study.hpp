#pragma once

// A small self-contained study: two recipes with four usable file:// pages each
// (plus a missing page and non-recipe pages to exercise backfill), a mock
// gateway and a mock search engine. Document ids derive from the page URLs, so
// the fixture lives at a fixed path to keep outputs comparable between builds.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "recipemem/annotation/service.hpp"
#include "recipemem/core/records.hpp"
#include "recipemem/core/text.hpp"

namespace recipemem::fixture {

inline const std::string kPancakeText =
    "Simple Pancakes\n\nIngredients:\n- 1 cup flour\n- 1 pinch salt\n- 1 egg\n- 1 cup milk\n\nSteps:\n"
    "1. Mix the flour and salt in a large mixing bowl.\n2. Whisk in the egg and milk until smooth.\n"
    "3. Fry ladles of batter in a hot pan until golden.\n";

inline const std::string kPancakeXml =
    "<recipe><ingredients><ingredient>flour</ingredient><ingredient>salt</ingredient><ingredient>egg</ingredient>"
    "<ingredient>milk</ingredient></ingredients><tasks>"
    "<task><name>mix</name><tool>large mixing bowl</tool><ingredient>flour</ingredient><ingredient>salt</ingredient></task>"
    "<task><name>whisk in</name><ingredient>egg</ingredient><ingredient>milk</ingredient></task>"
    "<task><name>fry</name><tool>pan</tool><ingredient>batter</ingredient></task>"
    "</tasks></recipe>";

inline const std::string kKoshariText =
    "Street Koshari\n\nIngredients:\n- 1 cup lentils\n- 1 cup rice\n- 1 cup macaroni\n- 2 cups tomato sauce\n"
    "- 2 fried onions\n- 1 tbsp chocolate syrup\n\nSteps:\n1. Cook the lentils and rice together in a pot.\n"
    "2. Boil the macaroni in a second pot.\n3. Layer the rice, lentils and macaroni.\n"
    "4. Top with tomato sauce, fried onions and chocolate syrup.\n";

inline const std::string kKoshariXml =
    "<recipe><ingredients><ingredient>lentils</ingredient><ingredient>rice</ingredient>"
    "<ingredient>macaroni</ingredient><ingredient>tomato sauce</ingredient><ingredient>fried onions</ingredient>"
    "<ingredient>chocolate syrup</ingredient></ingredients><tasks>"
    "<task><name>cook</name><tool>pot</tool><ingredient>lentils</ingredient><ingredient>rice</ingredient></task>"
    "<task><name>boil</name><tool>pot</tool><ingredient>macaroni</ingredient></task>"
    "<task><name>layer</name><ingredient>rice</ingredient><ingredient>lentils</ingredient>"
    "<ingredient>macaroni</ingredient></task>"
    "<task><name>top</name><ingredient>tomato sauce</ingredient><ingredient>fried onions</ingredient>"
    "<ingredient>chocolate syrup</ingredient></task></tasks></recipe>";

inline std::string looping_text() {
  std::string text = "Koshari\n\nIngredients:\n- lentils\n\nSteps:\n";
  for (int i = 0; i < 12; ++i) text += "Stir the lentils and keep stirring.\n";
  return text;
}

struct FixturePage {
  std::string marker;
  std::string title;
  std::vector<std::string> ingredients;  // empty: the page holds no recipe
  std::vector<std::pair<std::string, std::vector<std::string>>> tasks;  // action, ingredients
  bool exists = true;
};

inline std::vector<FixturePage> pancake_pages() {
  return {
      {"DOC-P1", "Classic pancakes", {"flour", "salt", "egg", "milk"},
       {{"mix", {"flour", "salt"}}, {"whisk in", {"egg", "milk"}}, {"fry", {"batter"}}}},
      {"DOC-P2", "Fluffy pancakes", {"flour", "egg", "milk", "baking powder"},
       {{"whisk", {"flour", "egg", "milk"}}, {"cook", {"batter"}}}},
      {"DOC-P3", "Our story", {}, {}},
      {"DOC-P4", "Pancakes for a crowd", {"flour", "salt", "egg", "milk", "butter"},
       {{"mix", {"flour", "salt"}}, {"beat in", {"egg", "milk"}}, {"fry", {"batter", "butter"}}}},
      {"DOC-P5", "Thin pancakes", {"flour", "egg", "milk", "sugar"},
       {{"blend", {"flour", "egg", "milk", "sugar"}}, {"fry", {"batter"}}}},
  };
}

inline std::vector<FixturePage> koshari_pages() {
  return {
      {"DOC-K1", "Easy koshari", {"lentils", "rice", "macaroni", "tomato sauce", "onions"},
       {{"boil", {"lentils"}}, {"add", {"rice"}}, {"cook", {"macaroni"}}, {"top", {"tomato sauce", "onions"}}}},
      {"DOC-K2", "Moved page", {}, {}, false},
      {"DOC-K3", "Koshari night", {"lentils", "rice", "pasta", "tomato sauce", "fried onions", "chickpeas"},
       {{"cook", {"lentils", "rice"}}, {"boil", {"pasta"}}, {"layer", {"rice", "lentils", "pasta"}},
        {"top", {"tomato sauce", "fried onions"}}}},
      {"DOC-K4", "Cairo street food", {}, {}},
      {"DOC-K5", "Koshari bowls", {"lentils", "rice", "macaroni", "tomato sauce", "garlic"},
       {{"simmer", {"lentils", "rice"}}, {"boil", {"macaroni"}}, {"pour over", {"tomato sauce"}}}},
      {"DOC-K6", "Weeknight koshari", {"lentils", "rice", "macaroni", "tomato sauce", "fried onions", "vinegar"},
       {{"cook", {"lentils"}}, {"add", {"rice"}}, {"boil", {"macaroni"}}, {"layer", {"rice", "lentils", "macaroni"}},
        {"top", {"tomato sauce", "fried onions"}}}},
  };
}

inline std::string page_html(const FixturePage& page) {
  std::string html = "<!DOCTYPE html><html><head><title>" + page.title + "</title></head><body>\n";
  html += "<nav><a href=\"/\">Home</a> <a href=\"/recipes\">Recipes</a></nav>\n<h1>" + page.title + "</h1>\n";
  html += "<p>Reference " + page.marker + "</p>\n";
  if (page.ingredients.empty()) {
    html += "<p>We have been cooking together since 1998.</p>\n";
  } else {
    html += "<ul>\n";
    for (const auto& i : page.ingredients) html += "<li>" + i + "</li>\n";
    html += "</ul>\n<ol>\n";
    for (const auto& [action, items] : page.tasks) html += "<li>" + action + " the " + items.front() + "</li>\n";
    html += "</ol>\n";
  }
  return html + "</body></html>\n";
}

inline std::string page_xml(const FixturePage& page) {
  std::string xml = "<recipe><ingredients>";
  for (const auto& i : page.ingredients) xml += "<ingredient>" + i + "</ingredient>";
  xml += "</ingredients><tasks>";
  for (const auto& [action, items] : page.tasks) {
    xml += "<task><name>" + action + "</name>";
    for (const auto& i : items) xml += "<ingredient>" + i + "</ingredient>";
    xml += "</task>";
  }
  return xml + "</tasks></recipe>";
}

inline Json completion_rule(std::vector<std::string> contains, const std::string& text) {
  return {{"type", "completion"}, {"contains", contains}, {"text", text}};
}

// Writes pages, gateway fixture and search fixture below `dir`.
inline void write_fixture(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir + "/pages");
  std::vector<Json> gateway = {{{"type", "options"}, {"logprobs", true}, {"hash_scores", true}}};
  gateway.push_back(completion_rule({"answer exactly: NO FLAWS", "Recipe name: Pancakes"}, "NO FLAWS"));
  gateway.push_back(completion_rule({"answer exactly: NO FLAWS", "Recipe name: Koshari"},
                                    "FLAW: chocolate syrup | it does not belong in koshari"));
  gateway.push_back(completion_rule({"Two recipes for \"Pancakes\""}, "A"));
  gateway.push_back(completion_rule({"from the recipe below", "Simple Pancakes"}, kPancakeXml));
  gateway.push_back(completion_rule({"from the recipe below", "Street Koshari"}, kKoshariXml));

  Json search = {{"engine", "fixture-search"}, {"results", Json::object()}};
  const auto add_pages = [&](const std::string& recipe, const std::vector<FixturePage>& pages) {
    Json urls = Json::array();
    for (const auto& page : pages) {
      const auto path = dir + "/pages/" + to_lower(page.marker) + ".html";
      if (page.exists) write_file(path, page_html(page));
      urls.push_back("file://" + path);
      gateway.push_back(completion_rule({"Page text:", page.marker}, page_xml(page)));
    }
    search["results"][recipe + " recipe"] = urls;
  };
  add_pages("Pancakes", pancake_pages());
  add_pages("Koshari", koshari_pages());

  gateway.push_back(completion_rule({"making Koshari", "thorough walkthrough"}, looping_text()));
  gateway.push_back(completion_rule({"making Koshari"}, kKoshariText));
  gateway.push_back(completion_rule({"making Pancakes"}, kPancakeText));
  write_json_lines(dir + "/gateway.jsonl", gateway);
  write_file(dir + "/search.json", search.dump(2) + "\n");
}

inline Json fixture_config(const std::string& fixture_dir) {
  const Json mock = {{"backend", "mock"}, {"mock_fixture", fixture_dir + "/gateway.jsonl"}, {"max_concurrency", 2}};
  return {
      {"study_id", "fixture-study"},
      {"seed", 7},
      {"recipes", Json::array({"Pancakes", {{"name", "Koshari"}, {"origin", "Egyptian"}}})},
      {"models", {{"gen", mock}, {"parser", mock}, {"judge-a", mock}, {"judge-b", mock}}},
      {"generation", {{"model", "gen"}, {"k", 2}, {"prompt_type", 2}}},
      {"parse", {{"model", "parser"}}},
      {"retrieval",
       {{"engines", Json::array({{{"id", "fixture-search"}, {"type", "mock"}, {"fixture", fixture_dir + "/search.json"}}})},
        {"per_engine_count", 8},
        {"nd", 4},
        {"politeness_ms", 0}}},
      {"extraction", {{"model", "parser"}}},
      {"judge", {{"models", Json::array({"judge-a", "judge-b"})}, {"task_classes", 4}}},
      {"annotation", {{"annotators", Json::array({"ann1", "ann2"})}, {"per_annotator", 3}, {"overlap", 2}}},
      {"stats", {{"classes", 3}}},
  };
}

// Writes the fixture under `fixture_dir` and a config.json into `study_dir`.
inline void prepare_study(const std::string& fixture_dir, const std::string& study_dir) {
  write_fixture(fixture_dir);
  std::filesystem::create_directories(study_dir);
  write_file(study_dir + "/config.json", fixture_config(fixture_dir).dump(2) + "\n");
}

// Answers every pending item. Labels are picked from the allowed list by a
// hash of the cell; the second annotator deviates on roughly a quarter of them.
inline void annotate_everything(annotation::AnnotationService& service, const std::vector<std::string>& annotators) {
  for (const auto& who : annotators) {
    while (auto item = service.next_pending(who)) {
      const std::string cell = item->recipe + "|" + item->document_id + "|" + std::string(to_string(item->item_kind)) +
                               "|" + std::to_string(item->item_ordinal);
      auto h = fnv1a64(cell);
      if (who != annotators.front() && fnv1a64(cell + who) % 4 == 0) h = fnv1a64(cell + "alt");
      AnnotationRecord r;
      r.annotator = who;
      r.recipe = item->recipe;
      r.document_id = item->document_id;
      r.item_kind = item->item_kind;
      r.item_ordinal = item->item_ordinal;
      const auto n = item->allowed_labels.size();
      bool stored = false;
      for (std::size_t attempt = 0; attempt < n && !stored; ++attempt) {
        r.label = item->allowed_labels[(h + attempt) % n];
        stored = service.record(r).status != annotation::RecordStatus::Invalid;
      }
      if (!stored) throw std::logic_error("no label accepted for " + cell);
    }
  }
}

}  // namespace recipemem::fixture
