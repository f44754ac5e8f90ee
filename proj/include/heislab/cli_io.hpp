#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace heis {

enum class Command { kernel, solve, sweep, certify, mild, estimates };

const char* to_string(Command c);
/// Throws InvalidArgument for unknown names.
Command command_from_string(const std::string& name);

/// One configurable key of a command with its default (as text) and a one-line description.
struct KeySpec {
  std::string name;
  std::string default_value;
  std::string description;
};

/// Keys accepted by `command`, in documentation order.
const std::vector<KeySpec>& command_keys(Command command);

/// Flat key = value configuration of one command.
///
/// Text format: one `key = value` per line; blank lines and lines starting with '#' are
/// ignored. Later assignments override earlier ones, so flags applied after the file win.
class RunConfig {
 public:
  explicit RunConfig(Command command);

  Command command() const { return command_; }

  /// Throws InvalidArgument naming the key when it is unknown to the command.
  void set(const std::string& key, const std::string& value);
  void load_text(const std::string& text, const std::string& origin = "<text>");
  void load_file(const std::string& path);

  /// Materialises defaults and validates every key; throws InvalidArgument naming the
  /// first offending key.
  void resolve();
  bool resolved() const { return resolved_; }

  const std::string& get(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// Comma-separated reals; an empty value gives an empty list.
  std::vector<double> reals(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// `key = value` lines in key order.
  std::string dump() const;

  int workers = 1;
  std::uint64_t seed = 20240917;

 private:
  Command command_;
  std::map<std::string, std::string> values_;
  bool resolved_ = false;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct CommandReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> files;  ///< written paths relative to the output directory
  std::string summary;

  bool all_pass() const;
};

/// Process exit codes: 0 all checks pass, then one code per failure class.
enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,
  exit_config_error = 2,
  exit_numerical_error = 3,
  exit_io_error = 4,
  exit_internal_error = 5,
};

/// Formats with 17 significant digits ('.' decimal separator, independent of locale).
std::string format_real(double v);

/// Minimal CSV writer with a header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::string path_;
  std::size_t columns_;
  std::string buffer_;
};

/// Reads a CSV written by CsvWriter into header + rows of cells.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Runs a resolved configuration and writes its reports plus `run-manifest.json` into out_dir.
///
/// The manifest is written before compute starts (status "running") and finalised on exit,
/// including error exits, where it records the error before the exception propagates.
/// Refuses a directory that already holds a manifest unless `force`.
CommandReport run_command(RunConfig& config, const std::string& out_dir, bool force);

std::string library_version();

}  // namespace heis
