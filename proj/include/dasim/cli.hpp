#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace dasim::cli {

enum ExitCode { kOk = 0, kFailure = 1, kInvalid = 2, kReplay = 3, kDeadlock = 4 };

/// Machine-readable record of one command run.
struct RunReport {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();  // seconds per phase
  std::vector<std::string> warnings;
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  int exit_code = kOk;
  std::string error;
};

nlohmann::json to_json(const RunReport& r);

/// Parses and runs one subcommand: discover, simulate, evaluate, split, scenario.
/// The report is written to `--report` (or beside `--out`) on success and failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace dasim::cli
