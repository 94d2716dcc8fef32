#ifndef TMPREDICT_TOOLS_CLI_HPP
#define TMPREDICT_TOOLS_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmpredict/config_file.hpp"
#include "tmpredict/eval.hpp"

namespace tmpredict::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kDiverged = 3,
  kMismatch = 4,
};

/// Fully resolved run configuration. Read from a `key = value` file, then
/// overridden by command-line flags.
struct RunConfig {
  std::filesystem::path manifest;
  std::optional<std::uint64_t> seed;
  EvalConfig eval;
  std::vector<std::size_t> depths{1, 2, 3, 4, 5, 6};
  bool report_vectors = false;

  /// Throws InvalidConfig when the seed is missing or the manifest is absent.
  void validate() const;

  /// Every key with defaults filled; reloading it gives the same RunConfig.
  KeyValueFile echo() const;
};

/// Relative paths in the file resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from(const KeyValueFile& file, const std::filesystem::path& base_dir);

/// "1,2,3" or "1-6". Throws InvalidConfig on zero, empty or malformed items.
std::vector<std::size_t> parse_depths(const std::string& text);

/// Entry point for the `tmpredict` binary. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmpredict::cli

#endif  // TMPREDICT_TOOLS_CLI_HPP
