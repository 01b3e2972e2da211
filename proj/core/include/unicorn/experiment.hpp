#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unicorn/env.hpp"
#include "unicorn/harness.hpp"
#include "unicorn/tasks.hpp"

namespace unicorn {

/// Thrown for malformed or inconsistent experiment configuration; the
/// message names the offending key.
class ConfigKeyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& preset_names();

inline constexpr int kNumColors = 4;
inline constexpr int kNumShapes = 4;
std::string color_name(int color);
std::string shape_name(int shape);
std::string role_name(int role);

struct ExperimentPreset {
  std::string name;
  EnvConfig env;
  TaskSet tasks;
  /// Agent labels to run. "experts" expands to one expert per behavior goal.
  std::vector<std::string> agents;
  /// Default frame budget and evaluation cadence for this preset.
  std::uint64_t total_env_frames = 0;
  std::uint64_t eval_every_frames = 0;
  /// Free-form caveats reported in the summary (e.g. a declared split).
  std::vector<std::string> notes;
};

/// Builds one of preset_names(). `holdout` overrides the hold-out task
/// indices of the transfer presets. Throws std::invalid_argument for
/// unknown names, listing the valid ones.
ExperimentPreset make_preset(std::string_view name, const std::optional<std::vector<int>>& holdout = {});

/// Task set and goal encoding of a preset.
TaskSet build_task_set(std::string_view name, const std::optional<std::vector<int>>& holdout = {});

struct ExperimentConfig {
  RunConfig run;
  ExperimentPreset preset;
  std::optional<std::vector<int>> holdout;
};

/// Parses the JSON experiment configuration. An empty document is allowed.
/// `preset_override` wins over the document's "preset" key. Unknown keys
/// and invariant violations raise ConfigKeyError.
ExperimentConfig parse_config(std::string_view text, const std::optional<std::string>& preset_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::optional<std::string>& preset_override = {});
/// Fully resolved JSON (every key present) that parse_config accepts.
std::string serialize_config(const ExperimentConfig& config);

/// Expands "experts" into one expert label per behavior goal.
std::vector<AgentSpec> expand_agents(const ExperimentPreset& preset);

struct AgentOutcome {
  std::string label;
  std::vector<RunResult> runs;
};

struct ExperimentOutcome {
  std::filesystem::path run_dir;
  std::vector<AgentOutcome> agents;
  bool failed = false;
};

/// Runs every agent of the preset and writes the run directory
///   <out_root>/<preset>_s<seed>_<timestamp>/
///     config.json  summary.txt  <agent>/metrics.csv  <agent>/checkpoints/
ExperimentOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_root,
                                 std::ostream& log);

/// Decomposition table plus training / hold-out curve data.
std::string summarize(const ExperimentConfig& config, const std::vector<AgentOutcome>& agents);

}  // namespace unicorn
