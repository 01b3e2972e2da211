#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace unicorn {

/// A kind of collectible object. Multi-task and transfer worlds describe
/// objects by color and shape; dependency-chain worlds by their chain role
/// (key = 0, lock = 1, door = 2, chest = 3, cake = 4).
struct ObjectType {
  int id = 0;
  std::optional<int> color;
  std::optional<int> shape;
  std::optional<int> role;

  bool operator==(const ObjectType&) const = default;
};

enum class TaskKind {
  kSingleObject,
  kAbstractColor,
  kAbstractShape,
  kChainStep,
  kGluttonSum,
};

std::string to_string(TaskKind kind);

/// A pseudo-reward definition. `target` is an object id, color, shape or
/// chain position depending on `kind`; it is ignored for kGluttonSum.
struct TaskSpec {
  TaskKind kind = TaskKind::kSingleObject;
  int target = 0;
  std::string name;

  bool operator==(const TaskSpec&) const = default;
};

enum class GoalScheme { kOneHot, kTwoHot, kAugmented, kConstant };

std::string to_string(GoalScheme scheme);

/// K x d goal-signal matrix; row i conditions the value network on task i.
struct GoalEncoding {
  GoalScheme scheme = GoalScheme::kOneHot;
  Eigen::MatrixXd matrix;

  int num_goals() const { return static_cast<int>(matrix.rows()); }
  int dim() const { return static_cast<int>(matrix.cols()); }
  Eigen::VectorXd goal(int index) const { return matrix.row(index).transpose(); }
};

/// The K tasks of an experiment plus which of them drive behavior, which
/// receive learning updates, and which are held out for evaluation only.
struct TaskSet {
  std::vector<ObjectType> object_types;
  std::vector<TaskSpec> tasks;
  GoalEncoding encoding;
  std::vector<int> behavior_goals;
  std::vector<int> learn_goals;
  std::vector<int> holdout_goals;

  int num_tasks() const { return static_cast<int>(tasks.size()); }
  bool has_chain_tasks() const;
  /// Behavior, learnable and hold-out goals, sorted and deduplicated.
  std::vector<int> evaluation_goals() const;
  /// Throws std::invalid_argument on any inconsistency.
  void validate() const;
};

/// Component i is 1 when task i is satisfied by collecting `collected` on
/// top of `inventory_before` (most recent first), otherwise 0.
std::vector<double> pseudo_rewards(std::span<const int> inventory_before, int collected,
                                   const TaskSet& tasks);

/// True when a chain object of the given role may be picked up in
/// conditional-pickup mode: its whole prerequisite prefix is on top of the
/// stack in order.
bool chain_prefix_holds(std::span<const int> inventory_before, int role,
                        std::span<const ObjectType> types);

}  // namespace unicorn
