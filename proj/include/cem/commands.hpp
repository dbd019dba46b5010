#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cem/config.hpp"

namespace cem {

// Library-level command implementations used by the CLI and by the tests.
// Each validates the config first, writes its outputs plus a manifest under a
// fresh run-stamped directory inside output_dir, and returns that directory.

std::filesystem::path cmd_prep(const RunConfig& cfg, std::ostream& log);

std::filesystem::path cmd_generate(const RunConfig& cfg, std::ostream& log);

std::filesystem::path cmd_experiment(const RunConfig& cfg, std::ostream& log);

std::filesystem::path cmd_predict(const RunConfig& cfg,
                                  const std::filesystem::path& model_path,
                                  const std::filesystem::path& input_csv,
                                  std::ostream& log);

// Exit-code mapping shared with the CLI: 0 ok, 2 config, 3 data, 4
// convergence, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace cem
