#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "recipemem/core/items.hpp"
#include "recipemem/core/text.hpp"
#include "recipemem/judge/judge.hpp"
#include "recipemem/llm/mock_backend.hpp"

using namespace recipemem;
using namespace recipemem::judge;
using llm::MockBackend;

namespace {

llm::Gateway gateway_over(std::shared_ptr<MockBackend> mock) { return llm::Gateway(std::move(mock), {0, 0}, 4); }

const Timestamp kAt = parse_timestamp("2024-06-01T08:00:00.000Z");

GeneratedRecipe pancakes() {
  GeneratedRecipe r;
  r.name.text = "pancakes";
  r.ingredients = {{"flour", 0}, {"salt", 1}, {"egg", 2}};
  r.tasks = {{"whisk", {{"bowl", false}}, {"flour", "egg"}, 0}};
  return r;
}

extraction::ExtractedDocument doc(std::string id) {
  extraction::ExtractedDocument d;
  d.document_id = std::move(id);
  d.ingredients = {"all-purpose flour", "eggs", "milk"};
  d.tasks = {{"beat", {{"whisk", false}}, {"eggs", "milk"}, 0}};
  d.extraction_model = "gemma";
  d.valid = true;
  return d;
}

// Scores keyed by continuation, identical for every prefix.
void score_by_text(MockBackend& mock, const Taxonomy& t, const std::vector<double>& scores) {
  for (std::size_t i = 0; i < t.choices.size(); ++i) mock.add_score_rule({}, " " + t.choices[i].text, scores[i]);
}

}  // namespace

TEST(Taxonomy, DefaultsShape) {
  const auto four = TaxonomySet::defaults();
  EXPECT_EQ(four.get(ItemKind::Ingredient).choices.size(), 3u);
  EXPECT_EQ(four.get(ItemKind::TaskName).choices.size(), 4u);
  EXPECT_EQ(four.get(ItemKind::Tool).choices.size(), 5u);
  EXPECT_EQ(four.get(ItemKind::IngredientList).choices.size(), 6u);
  EXPECT_EQ(four.get(ItemKind::Ingredient).choices[1].text, "Found (not perfect)");
  const auto two = TaxonomySet::defaults(TaskScheme::TwoClass);
  ASSERT_EQ(two.get(ItemKind::TaskName).choices.size(), 2u);
  EXPECT_EQ(two.get(ItemKind::TaskName).choices[1].label, Label(TaskLabel::TaskNotFound));
}

TEST(Taxonomy, DataFileMatchesDefaults) {
  const auto file = TaxonomySet::load(std::string(RECIPEMEM_FIXTURES) + "/../../data/taxonomy.json");
  const auto defaults = TaxonomySet::defaults();
  EXPECT_EQ(file.version(), defaults.version());
  for (ItemKind k : {ItemKind::Ingredient, ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList}) {
    EXPECT_EQ(file.get(k).description, defaults.get(k).description);
    ASSERT_EQ(file.get(k).choices.size(), defaults.get(k).choices.size());
  }
}

TEST(Taxonomy, RejectsBadFiles) {
  EXPECT_THROW(TaxonomySet::parse(R"({"version":"1","kinds":{"Ingredient":{"description":"d","choices":["Found"]}}})"),
               ConfigError);
  EXPECT_THROW(TaxonomySet::parse(
                   R"({"version":"1","kinds":{"Ingredient":{"description":"d","choices":["Found","Implied"]}}})"),
               ConfigError);
  EXPECT_THROW(TaxonomySet::parse(R"({"version":"1","kinds":{"Ingredient":{"description":"d","choices":["Found","Nope"]}}})"),
               ConfigError);
}

TEST(ChoicePrompts, PrefixesAreByteIdentical) {
  const auto tax = TaxonomySet::defaults();
  const auto recipe = pancakes();
  for (const auto& key : recipe_items(recipe)) {
    const auto pairs = build_choice_prompts(make_item(recipe, key.kind, key.ordinal), doc("d"), tax.get(key.kind));
    ASSERT_EQ(pairs.size(), tax.get(key.kind).choices.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_EQ(pairs[i].prefix, pairs[0].prefix);
      EXPECT_EQ(pairs[i].continuation, " " + tax.get(key.kind).choices[i].text);
    }
    const auto& prefix = pairs[0].prefix;
    EXPECT_NE(prefix.find(tax.get(key.kind).description), std::string::npos);
    EXPECT_NE(prefix.find(item_text(recipe, key.kind, key.ordinal)), std::string::npos);
  }
  const auto first = build_choice_prompts(make_item(recipe, ItemKind::Ingredient, 0), doc("d"),
                                          tax.get(ItemKind::Ingredient))[0].prefix;
  EXPECT_NE(first.find("- all-purpose flour\n- eggs\n- milk\n"), std::string::npos);
}

TEST(ChoicePrompts, TwoClassTasksAndPreconditions) {
  const auto two = TaxonomySet::defaults(TaskScheme::TwoClass);
  const auto recipe = pancakes();
  EXPECT_EQ(build_choice_prompts(make_item(recipe, ItemKind::TaskName, 0), doc("d"), two.get(ItemKind::TaskName)).size(), 2u);
  auto empty = doc("e");
  empty.ingredients.clear();
  EXPECT_THROW(build_choice_prompts(make_item(recipe, ItemKind::Ingredient, 0), empty, two.get(ItemKind::Ingredient)),
               PreconditionError);
  auto invalid = doc("i");
  invalid.valid = false;
  EXPECT_THROW(build_choice_prompts(make_item(recipe, ItemKind::Ingredient, 0), invalid, two.get(ItemKind::Ingredient)),
               PreconditionError);
}

TEST(Classify, ArgmaxAndMargin) {
  auto mock = std::make_shared<MockBackend>();
  const auto tax = TaxonomySet::defaults();
  const auto& ing = tax.get(ItemKind::Ingredient);
  score_by_text(*mock, ing, {-1.0, -2.0, -3.0});
  const auto d = classify(make_item(pancakes(), ItemKind::Ingredient, 0), doc("d1"), ing, gateway_over(mock), "gemma", kAt);
  EXPECT_EQ(d.record.label, Label(IngredientLabel::Found));
  EXPECT_EQ(d.record.annotator, "gemma");
  EXPECT_EQ(d.record.document_id, "d1");
  EXPECT_DOUBLE_EQ(*d.margin, 1.0);
  EXPECT_EQ(mock->score_calls(), 3);
}

TEST(Classify, TieGoesToFirstChoice) {
  auto mock = std::make_shared<MockBackend>();
  const auto tax = TaxonomySet::defaults();
  const auto& ing = tax.get(ItemKind::Ingredient);
  score_by_text(*mock, ing, {-2.0, -2.0, -3.0});
  const auto d = classify(make_item(pancakes(), ItemKind::Ingredient, 1), doc("d1"), ing, gateway_over(mock), "m", kAt);
  EXPECT_EQ(d.record.label, Label(IngredientLabel::Found));
  EXPECT_DOUBLE_EQ(*d.margin, 0.0);
  EXPECT_EQ(argmax_choice({-3.0, -1.0, -1.0}), 1u);
}

TEST(Classify, PermutationAndShiftInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> score(-12.0, -0.01);
  const auto tax = TaxonomySet::defaults();
  const auto recipe = pancakes();
  for (ItemKind kind : {ItemKind::Ingredient, ItemKind::TaskName, ItemKind::Tool, ItemKind::IngredientList}) {
    Taxonomy base = tax.get(kind);
    std::map<std::string, double> table;
    for (const auto& c : base.choices) table[" " + c.text] = score(rng);
    auto run = [&](const Taxonomy& t, double shift) {
      auto mock = std::make_shared<MockBackend>();
      for (const auto& [cont, s] : table) mock->add_score_rule({}, cont, s + shift);
      return classify(make_item(recipe, kind, 0), doc("d"), t, gateway_over(mock), "m", kAt).record.label;
    };
    const Label expected = run(base, 0.0);
    EXPECT_EQ(run(base, -3.5), expected);
    for (int p = 0; p < 20; ++p) {
      Taxonomy permuted = base;
      std::shuffle(permuted.choices.begin(), permuted.choices.end(), rng);
      EXPECT_EQ(run(permuted, 0.0), expected);
    }
  }
}

TEST(Classify, FailingScoreGivesNoDecision) {
  auto mock = std::make_shared<MockBackend>();
  mock->set_logprobs_supported(false);
  const auto tax = TaxonomySet::defaults();
  EXPECT_THROW(classify(make_item(pancakes(), ItemKind::Ingredient, 0), doc("d"), tax.get(ItemKind::Ingredient),
                        gateway_over(mock), "m", kAt),
               llm::CapabilityError);
  JudgeOptions opts;
  opts.model_ids = {"m"};
  const auto run = judge_study({{pancakes(), {doc("d")}}}, tax, gateway_over(mock), opts);
  EXPECT_TRUE(run.decisions.empty() || std::all_of(run.decisions.begin(), run.decisions.end(),
                                                   [](const JudgeDecision& d) { return d.auto_resolved; }));
  // three ingredients, the task name, and both dependents (no TaskNotFound is known)
  EXPECT_EQ(run.failures.size(), 6u);
}

TEST(JudgeStudy, Cardinality) {
  auto mock = std::make_shared<MockBackend>();
  mock->set_hash_scores(true);
  auto recipe = pancakes();
  recipe.tasks.clear();
  JudgeOptions opts;
  opts.model_ids = {"gemma"};
  const auto run = judge_study({{recipe, {doc("d1"), doc("d2")}}}, TaxonomySet::defaults(), gateway_over(mock), opts);
  EXPECT_EQ(run.decisions.size(), 6u);
  EXPECT_TRUE(run.failures.empty());
  EXPECT_EQ(run.decisions[0].record.document_id, "d1");
  EXPECT_EQ(run.decisions[3].record.document_id, "d2");
}

TEST(JudgeStudy, TaskNotFoundResolvesDependentsWithoutCalls) {
  auto mock = std::make_shared<MockBackend>();
  const auto tax = TaxonomySet::defaults();
  score_by_text(*mock, tax.get(ItemKind::Ingredient), {-1, -2, -3});
  score_by_text(*mock, tax.get(ItemKind::TaskName), {-5, -5, -5, -0.5});
  auto recipe = pancakes();
  recipe.ingredients.clear();
  JudgeOptions opts;
  opts.model_ids = {"gemma"};
  const auto run = judge_study({{recipe, {doc("d1")}}}, tax, gateway_over(mock), opts);
  ASSERT_EQ(run.decisions.size(), 3u);
  EXPECT_EQ(run.decisions[0].record.label, Label(TaskLabel::TaskNotFound));
  EXPECT_EQ(run.decisions[1].record.label, Label(ToolLabel::NotFilledIn));
  EXPECT_EQ(run.decisions[2].record.label, Label(IngredientListLabel::NotFilledIn));
  EXPECT_TRUE(run.decisions[1].auto_resolved);
  EXPECT_EQ(mock->score_calls(), 4);
}

TEST(JudgeStudy, EmptyGeneratedFieldsAreNotFilledIn) {
  auto mock = std::make_shared<MockBackend>();
  const auto tax = TaxonomySet::defaults();
  score_by_text(*mock, tax.get(ItemKind::TaskName), {-0.5, -5, -5, -5});
  score_by_text(*mock, tax.get(ItemKind::IngredientList), {-1, -2, -3, -4, -5, -6});
  auto recipe = pancakes();
  recipe.ingredients.clear();
  recipe.tasks[0].tools.clear();
  JudgeOptions opts;
  opts.model_ids = {"gemma"};
  const auto run = judge_study({{recipe, {doc("d1")}}}, tax, gateway_over(mock), opts);
  ASSERT_EQ(run.decisions.size(), 3u);
  EXPECT_EQ(run.decisions[1].record.label, Label(ToolLabel::NotFilledIn));
  EXPECT_EQ(run.decisions[2].record.label, Label(IngredientListLabel::IngredientsMatch));
  EXPECT_EQ(mock->score_calls(), 4 + 6);
}

TEST(JudgeStudy, InvalidDocumentsCountedOnce) {
  auto mock = std::make_shared<MockBackend>();
  mock->set_hash_scores(true);
  auto bad = doc("d2");
  bad.valid = false;
  JudgeOptions opts;
  opts.model_ids = {"gemma", "llama"};
  const auto run = judge_study({{pancakes(), {doc("d1"), bad}}}, TaxonomySet::defaults(), gateway_over(mock), opts);
  EXPECT_EQ(run.invalid_documents, std::vector<std::string>{"pancakes/d2"});
  for (const auto& d : run.decisions) EXPECT_EQ(d.record.document_id, "d1");
  EXPECT_EQ(run.decisions.size(), 2u * recipe_items(pancakes()).size());
  EXPECT_EQ(run.decisions.front().record.annotator, "gemma");
  EXPECT_EQ(run.decisions.back().record.annotator, "llama");
}

TEST(JudgeStudy, DecisionJsonRoundTrip) {
  auto mock = std::make_shared<MockBackend>();
  const auto tax = TaxonomySet::defaults();
  score_by_text(*mock, tax.get(ItemKind::Ingredient), {-1.25, -2.5, -3.0});
  const auto d = classify(make_item(pancakes(), ItemKind::Ingredient, 0), doc("d"), tax.get(ItemKind::Ingredient),
                          gateway_over(mock), "gemma", kAt);
  const auto j = decision_to_json(d, &tax.get(ItemKind::Ingredient));
  EXPECT_EQ(j.dump(),
            R"({"annotator":"gemma","recipe":"pancakes","document_id":"d","item_kind":"Ingredient","item_ordinal":0,)"
            R"("label":"Found","timestamp":"2024-06-01T08:00:00.000Z","scores":{"Found":-1.25,"FoundNotPerfect":-2.5,)"
            R"("NotFound":-3.0},"margin":1.25,"auto_resolved":false})");
  const auto back = decision_from_json(j);
  EXPECT_EQ(back.record, d.record);
  EXPECT_EQ(back.scores, d.scores);
  EXPECT_EQ(back.margin, d.margin);
}
