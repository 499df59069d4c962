#include "recipemem/cli/study.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <filesystem>
#include <set>

#include "recipemem/core/text.hpp"

namespace recipemem::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Generate, "generate"}, {Stage::Parse, "parse"}, {Stage::Retrieve, "retrieve"}, {Stage::Extract, "extract"},
    {Stage::Judge, "judge"},       {Stage::Serve, "serve"}, {Stage::Stats, "stats"},
};

std::string file_digest(const std::string& path) {
  if (path.empty() || !fs::is_regular_file(path)) return "";
  return stable_hash(read_file(path));
}

Json model_section(const StudySettings& s, const std::string& id) {
  const auto it = s.models.find(id);
  if (it == s.models.end()) return {{"id", id}};
  const auto& g = it->second;
  return {{"id", id},
          {"backend", g.backend},
          {"endpoint_url", g.endpoint_url},
          {"mock_fixture", file_digest(g.mock_fixture)}};
}

Json engines_section(const StudySettings& s) {
  Json out = Json::array();
  for (const auto& e : s.retrieval.engines) {
    out.push_back({{"id", e.id}, {"type", e.type}, {"endpoint", e.endpoint}, {"fixture", file_digest(e.fixture)}});
  }
  return out;
}

// The part of the configuration a stage's output depends on.
Json stage_config(Stage stage, const StudySettings& s, const std::string& root) {
  const Json all = settings_to_json(s);
  switch (stage) {
    case Stage::Generate: {
      Json g = all["generation"];
      return {{"seed", s.seed},
              {"recipes", all["recipes"]},
              {"selected", all["selected"]},
              {"templates", file_digest(s.templates)},
              {"generation", g},
              {"model", model_section(s, s.generation.model)},
              {"screen_model", model_section(s, s.generation.screen_model)}};
    }
    case Stage::Parse:
      return {{"parse", all["parse"]}, {"model", model_section(s, s.parse.model)}};
    case Stage::Retrieve: {
      Json r = all["retrieval"];
      r.erase("targeted_count");
      r["engines"] = engines_section(s);
      return r;
    }
    case Stage::Extract:
      return {{"extraction", all["extraction"]}, {"model", model_section(s, s.extraction.model)}, {"nd", s.retrieval.nd}};
    case Stage::Judge: {
      Json models = Json::array();
      for (const auto& m : s.judge.models) models.push_back(model_section(s, m));
      Json j = all["judge"];
      j.erase("max_parallel_documents");
      return {{"judge", j},
              {"models", models},
              {"taxonomy", file_digest(s.taxonomy)},
              {"targeted_count", s.retrieval.targeted_count},
              {"engines", s.retrieval.targeted_count > 0 ? engines_section(s) : Json::array()},
              {"extraction_model", s.extraction.model}};
    }
    case Stage::Serve:
      return {{"annotators", s.annotation.annotators},
              {"per_annotator", s.annotation.per_annotator},
              {"overlap", s.annotation.overlap},
              {"seed", s.seed}};
    case Stage::Stats:
      return {{"stats", all["stats"]},
              {"task_classes", s.judge.task_classes},
              {"models", s.judge.models},
              {"records", tree_hash(root, {"records"})}};
  }
  return {};
}

// Nearest first, so a missing direct upstream is the one reported.
std::vector<Stage> transitive_upstream(Stage stage) {
  std::vector<Stage> out = upstream_of(stage);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (Stage u : upstream_of(out[i])) {
      if (std::find(out.begin(), out.end(), u) == out.end()) out.push_back(u);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (const auto& [s, name] : kStageNames) {
    if (name == text) return s;
  }
  throw ConfigError("unknown stage: " + std::string(text));
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::Generate, Stage::Parse, Stage::Retrieve, Stage::Extract,
                                         Stage::Judge,    Stage::Serve, Stage::Stats};
  return stages;
}

const std::vector<Stage>& upstream_of(Stage stage) {
  static const std::map<Stage, std::vector<Stage>> table{
      {Stage::Generate, {}},
      {Stage::Parse, {Stage::Generate}},
      {Stage::Retrieve, {Stage::Parse}},
      {Stage::Extract, {Stage::Retrieve}},
      {Stage::Judge, {Stage::Parse, Stage::Extract}},
      {Stage::Serve, {Stage::Parse, Stage::Extract}},
      {Stage::Stats, {Stage::Judge}},
  };
  return table.at(stage);
}

const std::vector<std::string>& stage_outputs(Stage stage) {
  static const std::map<Stage, std::vector<std::string>> table{
      {Stage::Generate, {"generated"}},
      {Stage::Parse, {"recipes"}},
      {Stage::Retrieve, {"corpus"}},
      {Stage::Extract, {"extracted"}},
      {Stage::Judge, {"judge"}},
      {Stage::Serve, {"annotation"}},
      {Stage::Stats, {"reports"}},
  };
  return table.at(stage);
}

OrderingError::OrderingError(Stage stage, Stage missing)
    : Error("cannot run '" + std::string(to_string(stage)) + "': stage '" + std::string(to_string(missing)) +
            "' has not completed"),
      missing_(missing) {}

StalenessError::StalenessError(Stage stage, const std::string& what_changed, const std::string& recorded,
                               const std::string& current)
    : Error("stage '" + std::string(to_string(stage)) + "' is stale: its " + what_changed + " changed (recorded " +
            recorded + ", now " + current + "); rerun it first"),
      stale_(stage) {}

Json manifest_to_json(const Manifest& m) {
  Json stages = Json::object();
  for (Stage s : all_stages()) {
    const auto it = m.stages.find(s);
    if (it == m.stages.end()) continue;
    stages[std::string(to_string(s))] = {{"input_hash", it->second.input_hash},
                                         {"output_hash", it->second.output_hash},
                                         {"completed_at", it->second.completed_at},
                                         {"summary", it->second.summary}};
  }
  return {{"study_id", m.study_id}, {"config_hash", m.config_hash}, {"stages", stages}};
}

Manifest manifest_from_json(const Json& j) {
  Manifest m;
  m.study_id = j.at("study_id").get<std::string>();
  m.config_hash = j.value("config_hash", "");
  const Json stages = j.value("stages", Json::object());
  for (const auto& [name, v] : stages.items()) {
    m.stages[parse_stage(name)] = {v.at("input_hash").get<std::string>(), v.at("output_hash").get<std::string>(),
                                   v.value("completed_at", ""), v.value("summary", "")};
  }
  return m;
}

StudyLock::StudyLock(std::string root) : path_((fs::path(root) / ".lock").string()) {
  fs::create_directories(root);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const std::string pid = std::to_string(::getpid()) + "\n";
      [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      return;
    }
    if (errno != EEXIST) throw Error("cannot create lock file " + path_);
    long owner = 0;
    try {
      owner = std::stol(trim(read_file(path_)));
    } catch (const std::exception&) {
    }
    if (owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno != ESRCH)) {
      throw Error("study is locked by process " + std::to_string(owner) + " (" + path_ + ")");
    }
    fs::remove(path_);
  }
  throw Error("cannot acquire lock " + path_);
}

StudyLock::~StudyLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::string tree_hash(const std::string& root, const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& rel : paths) {
    const fs::path base = fs::path(root) / rel;
    if (fs::is_regular_file(base)) {
      entries.emplace_back(rel, stable_hash(read_file(base.string())));
    } else if (fs::is_directory(base)) {
      for (const auto& e : fs::recursive_directory_iterator(base)) {
        if (!e.is_regular_file()) continue;
        entries.emplace_back(fs::relative(e.path(), root).generic_string(), stable_hash(read_file(e.path().string())));
      }
    }
  }
  std::sort(entries.begin(), entries.end());
  std::string joined;
  for (const auto& [path, digest] : entries) joined += path + "\t" + digest + "\n";
  return stable_hash(joined);
}

Study::Study(std::string root, StudySettings settings, Manifest manifest)
    : root_(std::move(root)), settings_(std::move(settings)), manifest_(std::move(manifest)) {}

Study Study::open(const std::string& root, const std::optional<std::string>& config_path, const Overrides& overrides) {
  const std::string dir = fs::absolute(root).lexically_normal().string();
  const std::string stored = (fs::path(dir) / "config.json").string();
  StudySettings settings;
  if (config_path) {
    settings = load_settings(*config_path);
  } else if (fs::exists(stored)) {
    settings = load_settings(stored);
  } else {
    throw ConfigError("no configuration: pass --config for a new study (" + dir + ")");
  }
  apply(settings, overrides);
  validate(settings);

  Manifest manifest;
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  if (fs::exists(manifest_path)) {
    manifest = manifest_from_json(Json::parse(read_file(manifest_path)));
    if (manifest.study_id != settings.study_id) {
      throw ConfigError("study directory belongs to '" + manifest.study_id + "', configuration names '" +
                        settings.study_id + "'");
    }
  } else {
    manifest.study_id = settings.study_id;
  }

  fs::create_directories(dir);
  const std::string text = settings_to_json(settings).dump(2) + "\n";
  if (!fs::exists(stored) || read_file(stored) != text) write_file(stored, text);
  manifest.config_hash = stable_hash(text);
  return Study(dir, std::move(settings), std::move(manifest));
}

std::string Study::path(const std::string& relative) const { return (fs::path(root_) / relative).string(); }

std::string Study::input_hash(Stage stage) const {
  Json j = {{"stage", to_string(stage)}, {"config", stage_config(stage, settings_, root_)}};
  Json upstream = Json::object();
  for (Stage u : upstream_of(stage)) {
    const auto it = manifest_.stages.find(u);
    upstream[std::string(to_string(u))] = it == manifest_.stages.end() ? "" : it->second.output_hash;
  }
  j["upstream"] = upstream;
  return stable_hash(j.dump());
}

std::string Study::output_hash(Stage stage) const { return tree_hash(root_, stage_outputs(stage)); }

void Study::check_upstream(Stage stage) const {
  const auto ups = transitive_upstream(stage);
  for (Stage u : ups) {
    if (!manifest_.stages.count(u)) throw OrderingError(stage, u);
  }
  for (Stage u : all_stages()) {
    if (std::find(ups.begin(), ups.end(), u) == ups.end()) continue;
    const auto& marker = manifest_.stages.at(u);
    if (const auto now = input_hash(u); now != marker.input_hash) {
      throw StalenessError(u, "inputs", marker.input_hash, now);
    }
    if (const auto now = output_hash(u); now != marker.output_hash) {
      throw StalenessError(u, "outputs", marker.output_hash, now);
    }
  }
}

bool Study::up_to_date(Stage stage) const {
  const auto it = manifest_.stages.find(stage);
  return it != manifest_.stages.end() && it->second.input_hash == input_hash(stage) &&
         it->second.output_hash == output_hash(stage);
}

void Study::mark_complete(Stage stage, const std::string& summary, Timestamp at) {
  manifest_.stages[stage] = {input_hash(stage), output_hash(stage), format_timestamp(at), summary};
  save_manifest();
}

void Study::save_manifest() const { write_file(path("manifest.json"), manifest_to_json(manifest_).dump(2) + "\n"); }

}  // namespace recipemem::cli
