#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unicorn/actor.hpp"
#include "unicorn/env.hpp"
#include "unicorn/learner.hpp"
#include "unicorn/metrics.hpp"
#include "unicorn/tasks.hpp"
#include "unicorn/uvfa.hpp"

namespace unicorn {

enum class AgentKind { kUnicorn, kExpert, kGlutton, kRandom };

struct AgentSpec {
  AgentKind kind = AgentKind::kUnicorn;
  /// Task index for kExpert.
  int task = -1;

  /// "unicorn", "expert:<task>", "glutton" or "random".
  std::string label() const;
  /// Accepts the labels above; `expert:` takes a task index or task name.
  static AgentSpec parse(std::string_view text, const TaskSet& tasks);
  bool operator==(const AgentSpec&) const = default;
};

/// Threaded runs actors and the learner on separate threads. Lockstep
/// interleaves the same components deterministically on one thread; runs
/// with a single actor always use it so they are reproducible per seed.
enum class Schedule { kThreaded, kLockstep };

struct RunConfig {
  int num_actors = 8;
  std::uint64_t total_env_frames = 3'000'000;
  int queue_capacity = 128;
  std::uint64_t eval_every_frames = 250'000;
  int eval_episodes_per_goal = 5;
  AgentSpec agent;
  std::uint64_t seed = 1;
  Schedule schedule = Schedule::kThreaded;
  /// Reported frames are multiplied by this (the summed-expert account).
  std::uint64_t experience_multiplier = 1;

  LearnerConfig learner;
  RmsPropConfig optimizer;
  int repr_dim = 128;
  int hidden_dim = 256;
  /// Epsilon schedule shared by all actors; actor_id is assigned per worker.
  ActorConfig actor;
  EnvConfig env;
  /// Task set before baseline reconfiguration.
  TaskSet tasks;

  std::optional<std::filesystem::path> checkpoint_dir;

  void validate() const;
};

/// Reconfigures the task set for a baseline agent.
///   expert(t): only t drives behavior and learning, constant goal signal.
///   glutton:   appends a synthetic task paying the sum of all K rewards.
///   random / unicorn: unchanged.
TaskSet make_baseline(const TaskSet& tasks, const AgentSpec& agent);

/// Network shape implied by an environment and a (baseline) task set.
NetDims net_dims(const RunConfig& config, const TaskSet& tasks);

struct EvalOptions {
  int episodes = 5;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
};

/// Plays full episodes conditioned on `goal`. A null `params` plays the
/// uniform random policy. In worlds with chain tasks, every episode is
/// checked for count(p) >= count(p + 1); a violation throws std::logic_error.
MetricsRow evaluate(const NetParams* params, const EnvConfig& env, const std::shared_ptr<const TaskSet>& tasks,
                    int goal, const EvalOptions& options);

struct RunStats {
  std::uint64_t frames = 0;
  std::uint64_t pushed = 0;
  std::uint64_t consumed = 0;
  std::uint64_t residual = 0;
  std::uint64_t train_steps = 0;
  std::uint64_t duplicate_tags = 0;
  std::uint64_t chain_episodes_checked = 0;
  double wall_seconds = 0.0;
};

struct RunResult {
  AgentSpec agent;
  TaskSet tasks;
  std::vector<MetricsRow> rows;
  NetParams final_params;
  RunStats stats;
  bool failed = false;
  std::string failure;
};

/// Runs actors and learner until the frame budget is used up, evaluating
/// every `eval_every_frames` (and at the start and end). Rows are also
/// forwarded to `sink` when given. Worker failures stop the run and are
/// reported in the result rather than thrown.
RunResult run(const RunConfig& config, MetricsSink* sink = nullptr);

}  // namespace unicorn
