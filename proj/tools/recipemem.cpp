#include <signal.h>

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "recipemem/annotation/server.hpp"
#include "recipemem/annotation/service.hpp"
#include "recipemem/cli/study.hpp"
#include "recipemem/core/text.hpp"

namespace {

using namespace recipemem;
using namespace recipemem::cli;

enum ExitCode { Ok = 0, Failure = 1, BadConfig = 2, OutOfOrder = 3 };

void serve_until_signal(annotation::AnnotationService& service, const StudySettings& settings) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  annotation::AnnotationServer server(service, settings.annotation.static_dir);
  const int port = server.bind(settings.annotation.host, settings.annotation.port);
  server.start();
  std::cout << "serving " << settings.study_id << " on http://" << settings.annotation.host << ":" << port
            << " (Ctrl-C to stop)" << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  std::cout << "stopped" << std::endl;
}

void print_status(const Study& study) {
  std::cout << "study " << study.settings().study_id << " at " << study.root() << "\n";
  for (const auto stage : all_stages()) {
    std::cout << "  " << to_string(stage) << ": ";
    const auto& stages = study.manifest().stages;
    const auto it = stages.find(stage);
    if (it == stages.end()) {
      std::cout << "pending\n";
      continue;
    }
    std::string state = "done";
    try {
      study.check_upstream(stage);
      if (!study.up_to_date(stage)) state = "stale";
    } catch (const Error&) {
      state = "stale upstream";
    }
    std::cout << state << " (" << it->second.completed_at << ") " << it->second.summary << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recipe memorization study pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string study_dir = ".";
  std::optional<std::string> config;
  bool force = false;
  Overrides overrides;
  app.add_option("--study", study_dir, "Study directory")->capture_default_str();
  app.add_option("--config", config, "Configuration file (copied into the study)");
  app.add_flag("--force", force, "Rerun even when the stage is up to date");
  app.add_option("--seed", overrides.seed, "Random seed");
  app.add_option("--nd", overrides.nd, "Documents per recipe")->check(CLI::PositiveNumber);
  app.add_option("--k", overrides.k, "Candidates generated per recipe")->check(CLI::PositiveNumber);
  app.add_option("--prompt-type", overrides.prompt_type, "Prompt type")->check(CLI::Range(1, 5));
  app.add_option("--model", overrides.models, "Judge model id (repeatable)");
  app.add_option("--classes", overrides.classes, "Ingredient classes for model accuracy")
      ->check(CLI::IsMember({3, 4}));
  app.add_option("--task-classes", overrides.task_classes, "Task-name classes")->check(CLI::IsMember({2, 4}));
  app.add_flag("--figures", overrides.figures, "Also write gnuplot figure sources");

  std::vector<std::pair<CLI::App*, Stage>> stage_commands;
  const std::map<Stage, std::string> descriptions = {
      {Stage::Generate, "Generate and screen candidate recipes"},
      {Stage::Parse, "Parse selected recipes into structured lists"},
      {Stage::Retrieve, "Search and snapshot web documents"},
      {Stage::Extract, "Extract ingredient and task lists from documents"},
      {Stage::Judge, "Annotate documents with judge models"},
      {Stage::Serve, "Serve the human annotation API"},
      {Stage::Stats, "Compute agreement, accuracy and coverage tables"},
  };
  for (const auto stage : all_stages()) {
    stage_commands.emplace_back(app.add_subcommand(std::string(to_string(stage)), descriptions.at(stage)), stage);
  }
  auto* run_all = app.add_subcommand("run", "Run generate through stats (skips serve)");
  auto* status = app.add_subcommand("status", "Show stage completion");
  auto* report = app.add_subcommand("report", "Print the stats summary");

  CLI11_PARSE(app, argc, argv);

  try {
    auto study = Study::open(study_dir, config, overrides);
    RunOptions options;
    options.force = force;
    options.serve = serve_until_signal;

    const auto run = [&](Stage stage) {
      const auto result = run_stage(stage, study, options);
      std::cout << to_string(stage) << ": " << (result.ran ? "" : "up to date; ") << result.summary << std::endl;
    };
    if (status->parsed()) {
      print_status(study);
    } else if (report->parsed()) {
      const auto path = study.path("reports/summary.txt");
      if (!std::filesystem::exists(path)) throw OrderingError(Stage::Stats, Stage::Stats);
      std::cout << read_file(path);
    } else if (run_all->parsed()) {
      for (const auto stage : all_stages()) {
        if (stage != Stage::Serve) run(stage);
      }
    } else {
      for (const auto& [command, stage] : stage_commands) {
        if (command->parsed()) run(stage);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return BadConfig;
  } catch (const OrderingError& e) {
    std::cerr << "ordering error: " << e.what() << "\n";
    return OutOfOrder;
  } catch (const StalenessError& e) {
    std::cerr << "staleness error: " << e.what() << "\n";
    return OutOfOrder;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Failure;
  }
  return Ok;
}
