#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gvh/config.hpp"

namespace gvh {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitCheckFailed = 3,
  kExitEngineAbort = 4,
};

/// Environment variable consulted when neither --out-dir nor output.dir is set.
inline constexpr const char* kOutDirEnv = "GVHEDGE_OUT_DIR";

struct RunOptions {
  unsigned threads = 1;
  std::filesystem::path out_dir = ".";
  std::ostream* out = nullptr;  ///< summary lines; nullptr silences them
  /// Test hook for verify: perturb one kernel entry before the checks run.
  bool corrupt_kernel = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> files;
};

struct CheckResult {
  std::string name;
  std::string status;  ///< pass | fail | skip
  double metric = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

/// All invariant checks for the configured model; no files written.
VerifyReport verify_checks(const ExperimentConfig& cfg, const RunOptions& opts);

CommandResult cmd_verify(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_predict(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_price(const ExperimentConfig& cfg, const RunOptions& opts);
CommandResult cmd_hedge(const ExperimentConfig& cfg, const RunOptions& opts);

/// <out_dir>/<stem>_<config hash>.csv
std::filesystem::path artifact_path(const ExperimentConfig& cfg, const RunOptions& opts,
                                    const std::string& stem);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace gvh
