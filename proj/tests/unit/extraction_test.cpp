#include <gtest/gtest.h>

#include <filesystem>

#include "recipemem/core/text.hpp"
#include "recipemem/extraction/document.hpp"
#include "recipemem/llm/mock_backend.hpp"

using namespace recipemem;
using namespace recipemem::extraction;
using llm::MockBackend;

namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& rel) { return read_file(std::string(RECIPEMEM_FIXTURES) + "/" + rel); }

llm::Gateway gateway_over(std::shared_ptr<MockBackend> mock) { return llm::Gateway(std::move(mock), {0, 0}, 4); }

parser::ExtractOptions options() {
  parser::ExtractOptions o;
  o.model_id = "gemma-2-9b";
  return o;
}

std::string temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("recipemem-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST(HtmlToText, ListItemsBecomeLines) { EXPECT_EQ(html_to_text("<ul><li>2 eggs</li><li>salt</li></ul>"), "2 eggs\nsalt"); }

TEST(HtmlToText, ScriptPayloadRemoved) {
  const auto text = html_to_text("<p>before</p><script>var secret = '<p>payload</p>';</script><p>after</p>");
  EXPECT_EQ(text, "before\nafter");
  EXPECT_EQ(text.find("payload"), std::string::npos);
}

TEST(HtmlToText, EntitiesAndWhitespace) {
  EXPECT_EQ(html_to_text("<p>  1&frac12; cups   &amp; a&nbsp;pinch &#x2013; &#233;  &bogus; </p>"),
            "1\xC2\xBD cups & a pinch \xE2\x80\x93 \xC3\xA9 &bogus;");
  EXPECT_EQ(html_to_text("a < b <!-- hidden --> c"), "a < b c");
  EXPECT_EQ(html_to_text(""), "");
}

TEST(HtmlToText, GoldenPage) {
  EXPECT_EQ(html_to_text(fixture("html/koshari.html")), fixture("html/koshari.txt"));
}

TEST(DocumentExtraction, GoldenCounts) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_completion_rule({"Page text:", "Easy Koshari"}, fixture("html/koshari.xml"));
  const auto doc = extract_document_lists("d1", fixture("html/koshari.txt"), gateway_over(mock), options());
  EXPECT_TRUE(doc.valid) << doc.invalid_reason;
  EXPECT_EQ(doc.ingredients.size(), 8u);
  EXPECT_EQ(doc.tasks.size(), 6u);
  EXPECT_EQ(doc.extraction_model, "gemma-2-9b");
  EXPECT_EQ(doc.tasks[3].tools, (std::vector<Tool>{{"pan", false}}));
}

TEST(DocumentExtraction, EmptyListsAreInvalid) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_completion_rule({"Page text:"}, "<recipe><ingredients/><tasks/></recipe>");
  const auto doc = extract_document_lists("d2", "Privacy policy. We use cookies.", gateway_over(mock), options());
  EXPECT_FALSE(doc.valid);
  EXPECT_NE(doc.invalid_reason.find("no ingredients"), std::string::npos);
}

TEST(DocumentExtraction, RepairOnceThenValid) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_completion_rule({"could not be parsed"}, fixture("html/koshari.xml"));
  mock->add_completion_rule({"Page text:"}, "<recipe><ingredients><ingredient>rice</ingredients>");
  const auto doc = extract_document_lists("d3", fixture("html/koshari.txt"), gateway_over(mock), options());
  EXPECT_TRUE(doc.valid);
  EXPECT_EQ(doc.repairs, 1);
}

TEST(DocumentExtraction, IrreparableIsInvalidNotThrown) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_completion_rule({"Page text:"}, "sorry");
  const auto doc = extract_document_lists("d4", "text", gateway_over(mock), options());
  EXPECT_FALSE(doc.valid);
  EXPECT_FALSE(doc.invalid_reason.empty());
  EXPECT_THROW(extract_document_lists("d5", " \n", gateway_over(mock), options()), PreconditionError);
}

TEST(DocumentExtraction, CacheHitIsBitIdenticalAndSkipsGateway) {
  auto mock = std::make_shared<MockBackend>();
  mock->add_completion_rule({"Page text:"}, fixture("html/koshari.xml"));
  ExtractionCache cache(temp_dir("cache"));
  const auto text = fixture("html/koshari.txt");
  const auto first = extract_document_lists("d6", text, gateway_over(mock), options(), &cache);
  const auto cached_file = read_file(cache.path("d6", "gemma-2-9b"));
  EXPECT_EQ(cached_file.rfind("<!-- cache-key: " + extraction_cache_key(text, "gemma-2-9b") + " -->\n", 0), 0u);
  auto second = extract_document_lists("d6", text, gateway_over(mock), options(), &cache);
  EXPECT_EQ(mock->completion_calls(), 1);
  EXPECT_TRUE(second.from_cache);
  second.from_cache = false;
  EXPECT_EQ(second, first);
  EXPECT_EQ(extracted_to_json(second).dump(), extracted_to_json(first).dump());

  // a different model or changed text misses
  auto other = options();
  other.model_id = "llama-3";
  extract_document_lists("d6", text, gateway_over(mock), other, &cache);
  extract_document_lists("d6", text + " ", gateway_over(mock), options(), &cache);
  EXPECT_EQ(mock->completion_calls(), 3);
}

TEST(DocumentExtraction, JsonRoundTrip) {
  ExtractedDocument d;
  d.document_id = "abc";
  d.ingredients = {"salt", "pepper"};
  d.tasks.push_back({"season", {{"grinder", true}}, {"salt", "pepper"}, 0});
  d.extraction_model = "m";
  d.valid = true;
  EXPECT_EQ(extracted_from_json(extracted_to_json(d)), d);
}

TEST(ExtractionValidation, Rules) {
  ExtractedDocument d;
  d.ingredients = {"salt", "flour"};
  d.tasks.push_back({"mix", {}, {"salt"}, 0});
  EXPECT_TRUE(validate_extraction(d).issues.empty());

  auto no_tasks = d;
  no_tasks.tasks.clear();
  const auto r = validate_extraction(no_tasks);
  EXPECT_FALSE(r.acceptable());
  EXPECT_EQ(r.summary(), "no tasks");

  auto dup = d;
  dup.ingredients.push_back("Salt");
  const auto w = validate_extraction(dup);
  EXPECT_TRUE(w.acceptable());
  ASSERT_EQ(w.issues.size(), 1u);
  EXPECT_EQ(w.issues[0].code, "duplicate_ingredient");

  auto unnamed = d;
  unnamed.tasks.push_back({"", {}, {}, 1});
  EXPECT_FALSE(validate_extraction(unnamed).acceptable());
}
