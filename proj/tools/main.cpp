#include <ctime>
#include <iostream>

#include <CLI11.hpp>

#include "calorix/error.hpp"
#include "calorix/parallel.hpp"
#include "config.hpp"
#include "tasks.hpp"

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace calorix;
  CLI::App app{"calorix: caloric polynomials, parabolic layer potentials and Trefftz fits"};
  std::string task;
  std::string config;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> names{"list-tasks"};
  for (const cli::TaskInfo& t : cli::task_catalog()) names.push_back(t.name);
  app.add_option("task", task, "task to run, or list-tasks")->required()->check(CLI::IsMember(names));
  app.add_option("--config", config, "JSON experiment config");
  app.add_option("--out", out_dir, "output directory, overrides output.directory");
  app.add_option("--threads", threads, "worker threads (default: CALORIX_THREADS, then all cores)")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (task == "list-tasks") {
    std::cout << cli::list_tasks_text();
    return 0;
  }
  if (config.empty()) {
    std::cerr << "ConfigInvalid: --config is required for task " << task << '\n';
    return 2;
  }
  if (threads > 0) set_default_threads(threads);

  cli::ExperimentConfig cfg;
  try {
    cfg = cli::load_config(config, task);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    const cli::TaskResult result = cli::run_task(cfg);
    const std::filesystem::path dir = out_dir.empty() ? cfg.output.directory : std::filesystem::path(out_dir);
    for (const auto& path : cli::write_reports(cfg, result, dir, utc_timestamp())) std::cout << "wrote " << path.string() << '\n';
    std::cout << cli::summary_table(result);
    if (const cli::Assertion* failed = result.first_failure()) {
      std::cerr << "TaskFailed: " << failed->name << ": " << failed->first_failure << '\n';
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "TaskFailed: " << e.what() << '\n';
    return 1;
  }
}
