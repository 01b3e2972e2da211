#pragma once

#include <random>
#include <vector>

#include "unicorn/env.hpp"
#include "unicorn/learner.hpp"
#include "unicorn/tasks.hpp"
#include "unicorn/uvfa.hpp"

namespace unicorn::testing {

inline TaskSet chain_tasks(int length) {
  TaskSet ts;
  for (int r = 0; r < length; ++r) {
    ts.object_types.push_back({r, std::nullopt, std::nullopt, r});
    ts.tasks.push_back({TaskKind::kChainStep, r, "role" + std::to_string(r)});
  }
  ts.encoding.matrix = Eigen::MatrixXd::Identity(length, length);
  for (int r = 0; r < length; ++r) {
    ts.behavior_goals.push_back(r);
    ts.learn_goals.push_back(r);
  }
  return ts;
}

inline TaskSet object_tasks(int types) {
  TaskSet ts;
  for (int i = 0; i < types; ++i) {
    ts.object_types.push_back({i, i % 4, (i / 4) % 4, std::nullopt});
    ts.tasks.push_back({TaskKind::kSingleObject, i, "obj" + std::to_string(i)});
    ts.behavior_goals.push_back(i);
    ts.learn_goals.push_back(i);
  }
  ts.encoding.matrix = Eigen::MatrixXd::Identity(types, types);
  return ts;
}

inline EnvConfig env_for(const TaskSet& ts, int copies, int width = 8, int height = 8) {
  EnvConfig env;
  env.width = width;
  env.height = height;
  env.object_types = ts.object_types;
  env.object_counts.assign(ts.object_types.size(), copies);
  env.chain_mode = ts.has_chain_tasks();
  return env;
}

inline NetDims small_dims(int obs, int goal_dim, int goals = 1) {
  NetDims d;
  d.obs_dim = obs;
  d.repr_dim = 6;
  d.goal_dim = goal_dim;
  d.hidden_dim = 7;
  d.num_actions = 4;
  d.num_goals = goals;
  return d;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Random trajectory over real observations, K tasks, with episode breaks.
inline Trajectory random_observed_trajectory(std::mt19937_64& rng, int obs_dim, int k, int h) {
  std::uniform_int_distribution<int> action(0, 3);
  std::uniform_int_distribution<int> goal(0, k - 1);
  std::bernoulli_distribution coin(0.3);
  std::bernoulli_distribution rare(0.1);
  Trajectory t;
  t.observations.resize(obs_dim, h + 1);
  for (int c = 0; c <= h; ++c) t.observations.col(c) = random_vector(rng, obs_dim);
  t.rewards = Eigen::MatrixXd::Zero(k, h);
  int g = goal(rng);
  for (int s = 0; s < h; ++s) {
    t.behavior_goals.push_back(g);
    t.actions.push_back(action(rng));
    t.exploratory.push_back(coin(rng));
    const bool term = rare(rng);
    t.terminal.push_back(term);
    for (int i = 0; i < k; ++i) t.rewards(i, s) = rare(rng) ? 1.0 : 0.0;
    if (term) g = goal(rng);
  }
  return t;
}

}  // namespace unicorn::testing
