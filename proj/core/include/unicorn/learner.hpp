#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "unicorn/tasks.hpp"
#include "unicorn/uvfa.hpp"

namespace unicorn {

/// H consecutive transitions generated by one actor.
///
/// Step t goes from observations.col(t) via actions[t] to
/// observations.col(t + 1) and yields rewards.col(t) (all K tasks).
/// terminal[t] marks that the episode ended on step t; the following
/// column is then the first observation of a fresh episode.
struct Trajectory {
  int actor_id = 0;
  std::uint64_t sequence = 0;
  std::uint64_t snapshot_version = 0;
  /// Goal pursued on each step; constant within an episode.
  std::vector<int> behavior_goals;
  Eigen::MatrixXd observations;  // obs_dim x (H + 1)
  std::vector<int> actions;
  Eigen::MatrixXd rewards;  // K x H
  std::vector<std::uint8_t> exploratory;
  std::vector<std::uint8_t> terminal;

  int length() const { return static_cast<int>(actions.size()); }
  int behavior_goal_index() const { return behavior_goals.empty() ? -1 : behavior_goals.front(); }
  /// Throws std::invalid_argument when sequence lengths disagree.
  void validate(int num_tasks) const;
};

struct LearnerConfig {
  double discount = 0.95;
  int unroll = 20;
  int batch_size = 32;
};

/// Lowest-index argmax; shared by the behavior policy and the match test.
int greedy_action(std::span<const double> q_row);
int greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q_row);

/// Targets for one goal plus how each was formed.
struct TargetTrace {
  std::vector<double> targets;
  /// Number of reward terms summed before bootstrapping (the n of G^(n)).
  std::vector<int> reward_terms;
  /// True where accumulation stopped at an action mismatch rather than at
  /// a terminal step or the unroll boundary.
  std::vector<std::uint8_t> truncated;
};

/// Watkins-truncated n-step targets for `goal` given the goal's Q-values
/// at every observation of the trajectory (`q` is num_actions x (H + 1)).
/// Accumulation from step t continues through step t+k while the logged
/// action is the greedy one for `goal` (and, when `goal` drove behavior on
/// that step, was not exploratory). It bootstraps with max_a Q at the first
/// mismatch or the unroll boundary, and with 0 after a terminal step.
TargetTrace truncated_targets_from_q(const Trajectory& traj, int goal,
                                     const Eigen::Ref<const Eigen::MatrixXd>& q, double discount);

/// Targets for task `goal` evaluated with `params`.
std::vector<double> truncated_targets(const Trajectory& traj, int goal, const NetParams& params,
                                      const TaskSet& tasks, double discount);

struct LossResult {
  double loss = 0.0;
  NetParams grads;
  double truncation_rate = 0.0;
  /// Mean absolute TD error per learnable goal, in TaskSet::learn_goals order.
  std::vector<double> per_goal_td;
  std::size_t num_terms = 0;
};

/// L = 1/2 sum_{trajectories} sum_{learnable goals} sum_{t<H} (G_t,i - Q(s_t, a_t; g_i))^2
/// with targets frozen at `params`. Throws std::runtime_error on non-finite loss.
LossResult loss(std::span<const Trajectory> batch, const NetParams& params, const TaskSet& tasks,
                const LearnerConfig& config);

struct StepMetrics {
  double loss = 0.0;
  double truncation_rate = 0.0;
  std::vector<double> per_goal_td;
};

/// One gradient computation and one RMSProp update.
StepMetrics train_step(std::span<const Trajectory> batch, NetParams& params, OptState& opt,
                       const TaskSet& tasks, const LearnerConfig& config);

}  // namespace unicorn
