#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>

#include "../support/fixture_study.hpp"
#include "recipemem/cli/study.hpp"
#include "recipemem/core/error.hpp"

namespace fs = std::filesystem;
using namespace recipemem;
using namespace recipemem::cli;

namespace {

const std::string kFixtureDir = "/tmp/recipemem-fixture-cli";

std::string fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("recipemem-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir.string();
}

RunOptions pinned() {
  RunOptions o;
  o.clock = fixed_clock(parse_timestamp("2024-05-01T12:00:00.000Z"));
  o.serve = [](annotation::AnnotationService& service, const StudySettings& s) {
    fixture::annotate_everything(service, s.annotation.annotators);
  };
  return o;
}

Study open_fixture(const std::string& dir) {
  fixture::prepare_study(kFixtureDir, dir);
  return Study::open(dir, std::nullopt);
}

void run_through(Study& study, Stage last) {
  for (const auto stage : all_stages()) {
    run_stage(stage, study, pinned());
    if (stage == last) return;
  }
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(RECIPEMEM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Ordering, StatsBeforeJudgeNamesJudge) {
  auto study = open_fixture(fresh_dir("order"));
  try {
    run_stage(Stage::Stats, study, pinned());
    FAIL() << "expected an ordering error";
  } catch (const OrderingError& e) {
    EXPECT_EQ(e.missing(), Stage::Judge);
    EXPECT_NE(std::string(e.what()).find("'judge'"), std::string::npos) << e.what();
  }
}

TEST(Ordering, EachStageNeedsItsUpstream) {
  auto study = open_fixture(fresh_dir("each"));
  for (const auto stage : all_stages()) {
    if (upstream_of(stage).empty()) continue;
    EXPECT_THROW(run_stage(stage, study, pinned()), OrderingError) << to_string(stage);
  }
}

TEST(Pipeline, FullFixtureStudyCompletes) {
  const auto dir = fresh_dir("full");
  auto study = open_fixture(dir);
  const auto start = std::chrono::steady_clock::now();
  run_through(study, Stage::Stats);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(60));

  for (const auto stage : all_stages()) EXPECT_TRUE(study.up_to_date(stage)) << to_string(stage);
  const auto recipes = read_json_lines(dir + "/recipes/recipes.jsonl");
  ASSERT_EQ(recipes.size(), 2u);
  for (const auto& file : {"selection_ingredients.csv", "agreement_summary.csv", "model_accuracy.csv",
                           "saturation_ingredients_strict.csv", "creativity.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(dir + "/reports/" + file)) << file;
  }
  // the looping first Koshari candidate is screened out
  const auto verdicts = read_json_lines(dir + "/generated/verdicts.jsonl");
  bool looping_rejected = false;
  for (const auto& v : verdicts) {
    if (v["recipe"] == "Koshari" && v["variant"] == 1) looping_rejected = v["repetition"]["flagged"].get<bool>();
  }
  EXPECT_TRUE(looping_rejected);
  // flagged chocolate syrup is reported as nonsense or found, never as creative
  const auto creativity = read_file(dir + "/reports/creativity.csv");
  EXPECT_EQ(creativity.find("chocolate syrup,Creative"), std::string::npos) << creativity;
}

TEST(Pipeline, ExtractBackfillsRejectedDocuments) {
  const auto dir = fresh_dir("backfill");
  auto study = open_fixture(dir);
  run_through(study, Stage::Extract);
  const auto lines = read_json_lines(dir + "/extracted/pancakes.jsonl");
  int valid = 0, backfill = 0;
  for (const auto& l : lines) {
    valid += l["document"]["valid"].get<bool>();
    backfill += l["backfill"].get<bool>();
  }
  EXPECT_EQ(valid, 4);
  EXPECT_EQ(backfill, 1);
}

TEST(Idempotency, RerunningExtractIsANoOp) {
  const auto dir = fresh_dir("noop");
  auto study = open_fixture(dir);
  run_through(study, Stage::Extract);
  const auto manifest = read_file(dir + "/manifest.json");
  const auto stamp = fs::last_write_time(dir + "/manifest.json");
  const auto outputs = study.output_hash(Stage::Extract);

  auto reopened = Study::open(dir, std::nullopt);
  const auto result = run_stage(Stage::Extract, reopened, pinned());
  EXPECT_FALSE(result.ran);
  EXPECT_EQ(read_file(dir + "/manifest.json"), manifest);
  EXPECT_EQ(fs::last_write_time(dir + "/manifest.json"), stamp);
  EXPECT_EQ(reopened.output_hash(Stage::Extract), outputs);
}

TEST(Idempotency, ForceReruns) {
  const auto dir = fresh_dir("force");
  auto study = open_fixture(dir);
  run_through(study, Stage::Parse);
  RunOptions o = pinned();
  o.force = true;
  EXPECT_TRUE(run_stage(Stage::Parse, study, o).ran);
  EXPECT_TRUE(study.up_to_date(Stage::Parse));
}

TEST(Staleness, EditedUpstreamOutputIsDetected) {
  const auto dir = fresh_dir("stale-out");
  auto study = open_fixture(dir);
  run_through(study, Stage::Parse);
  write_file(dir + "/recipes/recipes.jsonl", read_file(dir + "/recipes/recipes.jsonl") + "\n");
  try {
    run_stage(Stage::Retrieve, study, pinned());
    FAIL() << "expected a staleness error";
  } catch (const StalenessError& e) {
    EXPECT_EQ(e.stale(), Stage::Parse);
    EXPECT_NE(std::string(e.what()).find("outputs"), std::string::npos) << e.what();
  }
}

TEST(Staleness, ChangedSettingInvalidatesDownstream) {
  const auto dir = fresh_dir("stale-in");
  auto study = open_fixture(dir);
  run_through(study, Stage::Retrieve);
  Overrides more;
  more.nd = 3;
  auto changed = Study::open(dir, std::nullopt, more);
  EXPECT_FALSE(changed.up_to_date(Stage::Retrieve));
  EXPECT_THROW(run_stage(Stage::Extract, changed, pinned()), StalenessError);
  EXPECT_TRUE(run_stage(Stage::Retrieve, changed, pinned()).ran);
  EXPECT_NO_THROW(run_stage(Stage::Extract, changed, pinned()));
}

TEST(Resume, ManifestAloneResumes) {
  const auto dir = fresh_dir("resume");
  {
    auto study = open_fixture(dir);
    run_through(study, Stage::Retrieve);
  }
  auto resumed = Study::open(dir, std::nullopt);
  EXPECT_TRUE(resumed.up_to_date(Stage::Retrieve));
  EXPECT_TRUE(run_stage(Stage::Extract, resumed, pinned()).ran);
}

TEST(Lock, ConcurrentInvocationIsRefused) {
  const auto dir = fresh_dir("lock");
  auto study = open_fixture(dir);
  {
    StudyLock held(dir);
    EXPECT_THROW(run_stage(Stage::Generate, study, pinned()), Error);
  }
  EXPECT_NO_THROW(run_stage(Stage::Generate, study, pinned()));
  EXPECT_FALSE(fs::exists(dir + "/.lock"));
}

TEST(Lock, StaleLockIsTakenOver) {
  const auto dir = fresh_dir("stale-lock");
  auto study = open_fixture(dir);
  const pid_t child = fork();
  if (child == 0) _exit(0);
  waitpid(child, nullptr, 0);
  write_file(dir + "/.lock", std::to_string(child) + "\n");
  EXPECT_NO_THROW(run_stage(Stage::Generate, study, pinned()));
}

TEST(Config, LiteralApiKeyIsRejected) {
  const auto dir = fresh_dir("apikey");
  fixture::prepare_study(kFixtureDir, dir);
  auto j = fixture::fixture_config(kFixtureDir);
  j["models"]["gen"]["api_key"] = "sk-live-123";
  write_file(dir + "/config.json", j.dump());
  EXPECT_THROW(Study::open(dir, std::nullopt), ConfigError);
  j["models"]["gen"]["api_key"] = "env:RECIPEMEM_KEY";
  write_file(dir + "/config.json", j.dump());
  EXPECT_NO_THROW(Study::open(dir, std::nullopt));
}

TEST(Config, MissingConfigurationIsAnError) {
  EXPECT_THROW(Study::open(fresh_dir("none"), std::nullopt), ConfigError);
}

TEST(Config, RejectsOutOfRangeValues) {
  const auto base = fixture::fixture_config(kFixtureDir);
  for (const auto& [section, key, value] :
       std::vector<std::tuple<std::string, std::string, int>>{{"generation", "prompt_type", 6},
                                                              {"generation", "k", 0},
                                                              {"retrieval", "nd", 0},
                                                              {"stats", "classes", 5},
                                                              {"judge", "task_classes", 3}}) {
    auto j = base;
    j[section][key] = value;
    EXPECT_THROW(validate(settings_from_json(j, "/")), ConfigError) << section << "." << key;
  }
}

TEST(Config, OverridesArePersisted) {
  const auto dir = fresh_dir("override");
  fixture::prepare_study(kFixtureDir, dir);
  Overrides o;
  o.seed = 99;
  o.models = {"judge-b"};
  o.classes = 4;
  o.task_classes = 2;
  o.figures = true;
  const auto study = Study::open(dir, std::nullopt, o);
  EXPECT_EQ(study.settings().seed, 99);
  const auto again = Study::open(dir, std::nullopt);
  EXPECT_EQ(again.settings().seed, 99);
  EXPECT_EQ(again.settings().judge.models, std::vector<std::string>{"judge-b"});
  EXPECT_EQ(again.settings().stats.classes, 4);
  EXPECT_EQ(again.settings().judge.task_classes, 2);
  EXPECT_TRUE(again.settings().stats.figures);
}

TEST(Config, RelativePathsResolveAgainstTheConfigFile) {
  const auto j = Json::parse(R"({"study_id":"s","recipes":["x"],"templates":"t.json",
    "models":{"m":{"backend":"mock","mock_fixture":"fx/g.jsonl"}}})");
  const auto s = settings_from_json(j, "/data/study");
  EXPECT_EQ(s.templates, "/data/study/t.json");
  EXPECT_EQ(s.models.at("m").mock_fixture, "/data/study/fx/g.jsonl");
}

TEST(Binary, ExitCodesAndFlags) {
  const auto dir = fresh_dir("binary");
  fixture::prepare_study(kFixtureDir, dir);
  EXPECT_EQ(run_binary("--study " + dir + " stats"), 3);
  EXPECT_EQ(run_binary("--study " + dir + " --prompt-type 9 generate"), 105);  // CLI11 ValidationError
  EXPECT_EQ(run_binary("--study " + fresh_dir("binary-empty") + " status"), 2);
  EXPECT_EQ(run_binary("generate --study " + dir + " --k 2 --seed 7"), 0);
  EXPECT_EQ(run_binary("--study " + dir + " status"), 0);
}

TEST(Config, ShippedExampleValidates) {
  const auto settings = load_settings(std::string(RECIPEMEM_FIXTURES) + "/../../data/study.example.json");
  EXPECT_NO_THROW(validate(settings));
  EXPECT_EQ(settings.generation.screen_model, settings.generation.model);
  EXPECT_TRUE(fs::exists(settings.templates));
  EXPECT_TRUE(fs::exists(settings.taxonomy));
}
