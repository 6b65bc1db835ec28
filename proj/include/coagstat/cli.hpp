#pragma once

#include <cstdint>
#include <string>

namespace coagstat {

// Worker count from COAGSTAT_THREADS (default 1). Results never depend on it.
int env_workers();

// Exit codes: 0 pass, 1 usage/config error, 2 scientific check failure.
int cmd_run(const std::string& config_path, const std::string& out_dir);
int cmd_continue(const std::string& config_path, const std::string& out_dir);
int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_dir);

int cli_main(int argc, char** argv);

}  // namespace coagstat
