#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace speconion {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-oriented `key = value` configuration with optional [section] headers
// (a section prefixes its keys as "section.key"). `#` starts a comment.
class ExperimentConfig {
 public:
  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, std::optional<std::string> def = {}) const;
  double get_double(const std::string& key, std::optional<double> def = {}) const;
  int get_int(const std::string& key, std::optional<int> def = {}) const;
  std::vector<double> get_list(const std::string& key,
                               std::optional<std::vector<double>> def = {}) const;

  // reject keys never read (typo guard); called after an experiment finishes
  void check_all_consumed() const;
  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
  std::string origin_;
};

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 numeric fail, 2 config error
  std::vector<std::string> notes;
};

// Dispatch an experiment by name into out_dir. Experiments write only inside
// out_dir; the manifest records a config echo, timings, and pass/fail lines.
RunResult run_experiment(const std::string& name, const ExperimentConfig& cfg,
                         const std::string& out_dir, int threads);

std::vector<std::string> experiment_names();

}  // namespace speconion
