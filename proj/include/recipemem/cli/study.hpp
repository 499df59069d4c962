#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recipemem/cli/config.hpp"
#include "recipemem/core/error.hpp"
#include "recipemem/core/time.hpp"

namespace recipemem::annotation {
class AnnotationService;
}

namespace recipemem::cli {

enum class Stage { Generate, Parse, Retrieve, Extract, Judge, Serve, Stats };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);
const std::vector<Stage>& all_stages();
// Stages whose completion markers must exist before `stage` may run.
const std::vector<Stage>& upstream_of(Stage stage);

// An upstream stage has not completed.
class OrderingError : public Error {
 public:
  OrderingError(Stage stage, Stage missing);
  Stage missing() const { return missing_; }

 private:
  Stage missing_;
};

// An upstream stage's inputs or outputs changed after it completed.
class StalenessError : public Error {
 public:
  StalenessError(Stage stage, const std::string& what_changed, const std::string& recorded, const std::string& current);
  Stage stale() const { return stale_; }

 private:
  Stage stale_;
};

struct StageMarker {
  std::string input_hash;
  std::string output_hash;
  std::string completed_at;
  std::string summary;
};

struct Manifest {
  std::string study_id;
  std::string config_hash;
  std::map<Stage, StageMarker> stages;
};

Json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j);

// Exclusive lock on a study directory (study/.lock holding the owner's pid).
// A lock left by a process that no longer exists is taken over.
class StudyLock {
 public:
  explicit StudyLock(std::string root);
  ~StudyLock();
  StudyLock(const StudyLock&) = delete;
  StudyLock& operator=(const StudyLock&) = delete;

 private:
  std::string path_;
};

// Hash over every regular file below the given paths (relative to root), by
// relative path and content. Missing paths hash as empty.
std::string tree_hash(const std::string& root, const std::vector<std::string>& paths);

class Study {
 public:
  // Loads study/config.json (or `config_path`, which then replaces it),
  // applies the overrides, validates, and persists the effective settings.
  // Throws ConfigError when neither configuration exists.
  static Study open(const std::string& root, const std::optional<std::string>& config_path,
                    const Overrides& overrides = {});

  const std::string& root() const { return root_; }
  const StudySettings& settings() const { return settings_; }
  const Manifest& manifest() const { return manifest_; }
  std::string path(const std::string& relative) const;

  std::string input_hash(Stage stage) const;
  std::string output_hash(Stage stage) const;
  // Throws OrderingError / StalenessError for the first unmet requirement.
  void check_upstream(Stage stage) const;
  bool up_to_date(Stage stage) const;
  void mark_complete(Stage stage, const std::string& summary, Timestamp at);

 private:
  Study(std::string root, StudySettings settings, Manifest manifest);
  void save_manifest() const;

  std::string root_;
  StudySettings settings_;
  Manifest manifest_;
};

// Output paths of a stage, relative to the study root.
const std::vector<std::string>& stage_outputs(Stage stage);

struct StageResult {
  Stage stage = Stage::Generate;
  bool ran = false;  // false: already complete and current
  std::string summary;
};

struct RunOptions {
  bool force = false;
  Clock clock = system_clock();
  // Called by the serve stage once the service is ready; blocks while serving.
  std::function<void(annotation::AnnotationService&, const StudySettings&)> serve;
};

StageResult run_stage(Stage stage, Study& study, const RunOptions& options = {});

}  // namespace recipemem::cli
