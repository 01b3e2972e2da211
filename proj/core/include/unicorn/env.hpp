#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "unicorn/tasks.hpp"

namespace unicorn {

enum class Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumActions = 4;
inline constexpr int kInventoryCapacity = 5;

enum class CollectMode { kAlwaysCollect, kConditionalPickup };

/// Raised for invalid world configurations (e.g. too many objects for the grid).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

struct EnvConfig {
  int width = 8;
  int height = 8;
  std::vector<ObjectType> object_types;
  /// Number of simultaneously present copies of each object type.
  std::vector<int> object_counts;
  int episode_length = 512;
  std::uint64_t seed = 0;
  bool chain_mode = false;
  CollectMode collect_mode = CollectMode::kAlwaysCollect;

  int num_types() const { return static_cast<int>(object_types.size()); }
  int total_objects() const;
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

struct PlacedObject {
  int type = 0;
  Cell pos;
  bool operator==(const PlacedObject&) const = default;
};

struct WorldState {
  int width = 0;
  int height = 0;
  int episode_length = 0;
  int num_types = 0;
  CollectMode collect_mode = CollectMode::kAlwaysCollect;
  std::vector<PlacedObject> objects;
  Cell agent;
  /// Most recently collected first, at most kInventoryCapacity entries.
  std::vector<int> inventory;
  int step_count = 0;
  int prev_action = -1;
  double prev_reward = 0.0;
  std::mt19937_64 rng;

  bool terminal() const { return step_count >= episode_length; }
  bool operator==(const WorldState&) const = default;
};

struct StepResult {
  std::vector<double> rewards;
  bool terminal = false;
  /// Object type collected on this step, or -1.
  int collected = -1;
};

/// Observation length: W*H*(T+1) + 5T + |A| + 1.
int observation_size(const EnvConfig& config);

WorldState reset(const EnvConfig& config, std::uint64_t seed);

/// Advances the world by one move. `feedback_task` selects which reward
/// component is echoed back as the previous-reward observation; pass -1
/// to echo zero.
StepResult step(WorldState& state, Action action, const TaskSet& tasks, int feedback_task = -1);

/// Fully observable symbolic encoding of `state`.
Eigen::VectorXd observe(const WorldState& state);
void observe_into(const WorldState& state, Eigen::Ref<Eigen::VectorXd> out);
int observation_size(const WorldState& state);

Action action_from_index(int index);

}  // namespace unicorn
