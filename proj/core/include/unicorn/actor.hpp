#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "unicorn/env.hpp"
#include "unicorn/learner.hpp"
#include "unicorn/tasks.hpp"
#include "unicorn/uvfa.hpp"

namespace unicorn {

/// Immutable published parameters. Actors hold a shared_ptr for the length
/// of one rollout; the learner never mutates a published snapshot.
struct ParameterSnapshot {
  NetParams params;
  std::uint64_t version = 0;
};

/// Single-writer, many-reader handle on the latest snapshot.
class SnapshotStore {
 public:
  explicit SnapshotStore(NetParams initial);

  std::shared_ptr<const ParameterSnapshot> latest() const;
  /// Publishes a copy of `params` under the next version number.
  std::uint64_t publish(const NetParams& params);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ParameterSnapshot> current_;
};

struct ActorConfig {
  int actor_id = 0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  std::uint64_t epsilon_anneal_frames = 1'000'000;
  int unroll = 20;
  /// Evaluation actors run whole episodes and never produce trajectories.
  bool evaluation_mode = false;
  /// Pins the goal instead of sampling one per episode.
  std::optional<int> fixed_goal;
  /// Overrides the annealing schedule.
  std::optional<double> fixed_epsilon;

  void validate() const;
};

/// Uniform index in [0, num_goals).
int sample_goal(std::mt19937_64& rng, int num_goals);

/// Linear anneal from epsilon_start to epsilon_end, constant afterwards.
double epsilon_at(std::uint64_t global_frames, const ActorConfig& config);

struct ActionChoice {
  int action = 0;
  bool exploratory = false;
};

/// Epsilon-greedy: with probability epsilon a uniform action (flagged
/// exploratory even if it equals the greedy one), otherwise the
/// lowest-index argmax.
ActionChoice act(std::span<const double> q_row, double epsilon, std::mt19937_64& rng);

/// Per-task reward totals of one finished episode.
struct EpisodeRecord {
  int goal = 0;
  std::vector<double> task_totals;
};

class Actor {
 public:
  Actor(ActorConfig config, EnvConfig env, std::shared_ptr<const TaskSet> tasks, std::uint64_t seed);

  /// Records exactly `unroll` transitions. A null snapshot acts uniformly at
  /// random. Episodes that end mid-rollout are reset inline and a new goal
  /// is drawn. `global_frames` is incremented once per environment step.
  Trajectory run_rollout(const ParameterSnapshot* snapshot, std::atomic<std::uint64_t>& global_frames);

  /// Plays one full episode from a fresh reset with a fixed epsilon.
  EpisodeRecord run_episode(const NetParams* params, double epsilon);

  std::vector<EpisodeRecord> take_completed_episodes();

  const WorldState& state() const { return state_; }
  int current_goal() const { return goal_; }
  const ActorConfig& config() const { return config_; }

 private:
  void begin_episode();
  ActionChoice choose(const NetParams* params, double epsilon);

  ActorConfig config_;
  EnvConfig env_;
  std::shared_ptr<const TaskSet> tasks_;
  std::mt19937_64 rng_;
  WorldState state_;
  int goal_ = 0;
  std::uint64_t sequence_ = 0;
  std::vector<double> episode_totals_;
  std::vector<EpisodeRecord> completed_;
  Eigen::VectorXd obs_;
  Eigen::VectorXd goal_vec_;
};

}  // namespace unicorn
