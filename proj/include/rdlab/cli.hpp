#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rdlab/families.hpp"
#include "rdlab/phase_space.hpp"

namespace rdlab::cli {

/// Flat "section.key = value" configuration.  Lines starting with '#' are
/// comments.  Later assignments override earlier ones.
class Config {
 public:
  Config() = default;
  static Config from_text(const std::string& text, const std::string& origin = "<text>");
  static Config from_file(const std::filesystem::path& path);

  /// Applies "key=value"; throws ConfigError when malformed.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::string text(const std::string& key) const;
  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double real(const std::string& key) const;
  [[nodiscard]] double real(const std::string& key, double fallback) const;
  [[nodiscard]] std::uint64_t uint(const std::string& key, std::uint64_t fallback) const;
  /// Same as uint() but rejects zero.
  [[nodiscard]] std::uint64_t positive(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] std::vector<double> reals(const std::string& key) const;
  [[nodiscard]] std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;

  /// Sorted "key=value" lines; the config hash is taken over this text.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;
  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct RunOptions {
  unsigned threads = 0;
  bool assert_thresholds = false;
  std::filesystem::path out_dir;  ///< empty: $RDLAB_OUT, else ./rdlab_out
  bool quiet = false;
};

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kAssertFailed = 4 };

[[nodiscard]] const std::vector<std::string>& subcommand_names();

/// Runs one subcommand and writes its artifacts.  Errors are mapped to exit
/// codes: ConfigError and invalid arguments 2, NumericalError 3, a failed
/// documented threshold under --assert 4.
int run_subcommand(const std::string& name, const Config& config, const RunOptions& options);

/// Helpers shared with the tests.
[[nodiscard]] ParametricFamily family_from(const Config& config);
[[nodiscard]] GridSpec grid_from(const Config& config, const PhaseBox& box, const std::string& key = "grid.cells");
[[nodiscard]] std::filesystem::path resolve_out_dir(const RunOptions& options);
[[nodiscard]] std::string header_line(const std::string& subcommand, const Config& config);

}  // namespace rdlab::cli
