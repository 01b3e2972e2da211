#pragma once

// Slow, independent reference implementations used to check the core
// library. Nothing here shares code paths with the code under test beyond
// the plain data types.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "unicorn/learner.hpp"
#include "unicorn/tasks.hpp"
#include "unicorn/uvfa.hpp"

namespace unicorn::oracles {

/// Q(s, .; g) by explicit loops, no representation sharing.
std::vector<double> naive_q(const NetParams& params, const Eigen::VectorXd& obs, const Eigen::VectorXd& goal);

/// G_t = r_t + gamma * (terminal ? 0 : boundary or mismatch ? max Q : G_{t+1}), top-down recursion.
double recursive_target(const Trajectory& traj, int goal, const Eigen::MatrixXd& q, double discount, int t);

/// Same targets as an explicit forward sum of n rewards plus bootstrap.
double forward_sum_target(const Trajectory& traj, int goal, const Eigen::MatrixXd& q, double discount, int t);

struct RandomTrajectory {
  Trajectory traj;
  /// num_tasks x num_actions x (H + 1) Q tables, one matrix per goal.
  std::vector<Eigen::MatrixXd> q;
  double discount = 0.9;
};

/// Random trajectory with H <= max_h, K <= max_k, A <= max_a. Q values are
/// drawn from a small grid so ties occur.
RandomTrajectory random_trajectory(std::mt19937_64& rng, int max_h = 20, int max_k = 8, int max_a = 4);

struct TargetSuiteReport {
  int trajectories = 0;
  std::uint64_t targets = 0;
  std::uint64_t mismatches = 0;
  std::string first_mismatch;
};

/// Compares truncated_targets_from_q with recursive_target (exact equality)
/// on `count` random trajectories.
TargetSuiteReport run_target_suite(std::uint64_t seed, int count);

/// Chain reward by string matching: the inventory is spelled as role
/// letters (most recent first) and task p fires when the collected letter
/// is the p-th and the spelling starts with the reversed prefix.
std::vector<double> chain_reward_by_string(const std::vector<int>& inventory_roles, int collected_role,
                                           int num_roles);

struct ChainSuiteReport {
  int stacks = 0;
  int cases = 0;
  int mismatches = 0;
  std::string first_mismatch;
};

/// Every inventory stack of length 0..5 over 4 roles against pseudo_rewards.
ChainSuiteReport run_chain_suite();

/// 1/2 sum (target - Q)^2 by a scalar triple loop over trajectories, goals, steps.
double naive_loss(std::span<const Trajectory> batch, const NetParams& params, const TaskSet& tasks,
                  double discount);

/// Central finite differences of sample_loss at every parameter.
NetParams finite_difference_gradients(const NetParams& params, std::span<const Sample> batch, double step);

/// Largest |a - b| / max(|a| + |b|, floor) over all parameters.
double max_relative_error(const NetParams& a, const NetParams& b, double floor = 1e-7);

/// Elementwise scalar RMSProp.
void scalar_rmsprop(std::vector<double>& params, std::vector<double>& accum, const std::vector<double>& grads,
                    const RmsPropConfig& config);

std::vector<double> flatten(const NetParams& params);

}  // namespace unicorn::oracles
