#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace calorix::cli {

/// One named check, possibly evaluated at many cases.
struct Assertion {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string first_failure;

  bool pass() const { return passed == total; }
  void record(bool ok, const std::string& what);
};

struct TaskResult {
  /// (file stem, CSV body with header row); the first entry is named after the task.
  std::vector<std::pair<std::string, std::string>> csv;
  nlohmann::json json = nlohmann::json::object();
  std::vector<Assertion> assertions;
  /// Extra comment lines for the CSV preamble.
  std::vector<std::string> notes;

  Assertion& check(const std::string& name);
  bool passed() const;
  const Assertion* first_failure() const;
};

/// Runs the configured task. Library errors propagate.
TaskResult run_task(const ExperimentConfig& cfg);

/// Writes every CSV (timestamp line, version, echoed config, body) and the
/// JSON report into `dir`, creating it. Returns the written paths.
std::vector<std::filesystem::path> write_reports(const ExperimentConfig& cfg, const TaskResult& result,
                                                 const std::filesystem::path& dir, const std::string& timestamp);

std::string list_tasks_text();

/// One line per assertion: name, passed/total, status.
std::string summary_table(const TaskResult& result);

}  // namespace calorix::cli
