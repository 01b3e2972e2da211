#include "unicorn/actor.hpp"

#include <algorithm>
#include <stdexcept>

namespace unicorn {

SnapshotStore::SnapshotStore(NetParams initial)
    : current_(std::make_shared<const ParameterSnapshot>(ParameterSnapshot{std::move(initial), 0})) {}

std::shared_ptr<const ParameterSnapshot> SnapshotStore::latest() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::uint64_t SnapshotStore::publish(const NetParams& params) {
  std::uint64_t version = 0;
  {
    std::lock_guard lock(mutex_);
    version = current_->version + 1;
  }
  auto next = std::make_shared<const ParameterSnapshot>(ParameterSnapshot{params, version});
  std::lock_guard lock(mutex_);
  current_ = std::move(next);
  return version;
}

void ActorConfig::validate() const {
  if (!(0.0 <= epsilon_end && epsilon_end <= epsilon_start && epsilon_start <= 1.0)) {
    throw std::invalid_argument("actor: need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (unroll <= 0) throw std::invalid_argument("actor: unroll must be positive");
}

int sample_goal(std::mt19937_64& rng, int num_goals) {
  if (num_goals < 1) throw std::invalid_argument("sample_goal: need at least one goal");
  std::uniform_int_distribution<int> pick(0, num_goals - 1);
  return pick(rng);
}

double epsilon_at(std::uint64_t global_frames, const ActorConfig& config) {
  if (config.fixed_epsilon) return *config.fixed_epsilon;
  if (config.epsilon_anneal_frames == 0 || global_frames >= config.epsilon_anneal_frames) {
    return config.epsilon_end;
  }
  const double frac = static_cast<double>(global_frames) / static_cast<double>(config.epsilon_anneal_frames);
  return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start);
}

ActionChoice act(std::span<const double> q_row, double epsilon, std::mt19937_64& rng) {
  if (q_row.empty()) throw std::invalid_argument("act: empty action set");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q_row.size()) - 1);
    return {pick(rng), true};
  }
  return {greedy_action(q_row), false};
}

Actor::Actor(ActorConfig config, EnvConfig env, std::shared_ptr<const TaskSet> tasks, std::uint64_t seed)
    : config_(std::move(config)), env_(std::move(env)), tasks_(std::move(tasks)), rng_(seed) {
  config_.validate();
  env_.validate();
  tasks_->validate();
  if (config_.fixed_goal && (*config_.fixed_goal < 0 || *config_.fixed_goal >= tasks_->num_tasks())) {
    throw std::invalid_argument("actor: fixed goal out of range");
  }
  obs_.resize(observation_size(env_));
  begin_episode();
}

void Actor::begin_episode() {
  if (config_.fixed_goal) {
    goal_ = *config_.fixed_goal;
  } else {
    const auto& goals = tasks_->behavior_goals;
    goal_ = goals[static_cast<std::size_t>(sample_goal(rng_, static_cast<int>(goals.size())))];
  }
  goal_vec_ = tasks_->encoding.goal(goal_);
  state_ = reset(env_, rng_());
  episode_totals_.assign(static_cast<std::size_t>(tasks_->num_tasks()), 0.0);
}

ActionChoice Actor::choose(const NetParams* params, double epsilon) {
  if (params == nullptr) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    return {pick(rng_), true};
  }
  observe_into(state_, obs_);
  const Eigen::VectorXd q = q_row(*params, obs_, goal_vec_);
  return act(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), epsilon, rng_);
}

Trajectory Actor::run_rollout(const ParameterSnapshot* snapshot, std::atomic<std::uint64_t>& global_frames) {
  if (config_.evaluation_mode) throw std::logic_error("actor: evaluation actors do not produce trajectories");
  const int h = config_.unroll;
  const NetParams* params = snapshot ? &snapshot->params : nullptr;

  Trajectory traj;
  traj.actor_id = config_.actor_id;
  traj.sequence = sequence_++;
  traj.snapshot_version = snapshot ? snapshot->version : 0;
  traj.behavior_goals.resize(static_cast<std::size_t>(h));
  traj.actions.resize(static_cast<std::size_t>(h));
  traj.exploratory.resize(static_cast<std::size_t>(h));
  traj.terminal.resize(static_cast<std::size_t>(h));
  traj.observations.resize(observation_size(env_), h + 1);
  traj.rewards.resize(tasks_->num_tasks(), h);

  observe_into(state_, traj.observations.col(0));
  for (int t = 0; t < h; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const double eps = epsilon_at(global_frames.load(std::memory_order_relaxed), config_);
    const ActionChoice choice = choose(params, eps);
    const StepResult res = step(state_, action_from_index(choice.action), *tasks_, goal_);
    global_frames.fetch_add(1, std::memory_order_relaxed);

    traj.behavior_goals[ut] = goal_;
    traj.actions[ut] = choice.action;
    traj.exploratory[ut] = choice.exploratory ? 1 : 0;
    traj.terminal[ut] = res.terminal ? 1 : 0;
    for (std::size_t k = 0; k < res.rewards.size(); ++k) {
      traj.rewards(static_cast<Eigen::Index>(k), t) = res.rewards[k];
      episode_totals_[k] += res.rewards[k];
    }
    if (res.terminal) {
      completed_.push_back({goal_, episode_totals_});
      begin_episode();
    }
    observe_into(state_, traj.observations.col(t + 1));
  }
  return traj;
}

EpisodeRecord Actor::run_episode(const NetParams* params, double epsilon) {
  begin_episode();
  while (true) {
    const ActionChoice choice = choose(params, epsilon);
    const StepResult res = step(state_, action_from_index(choice.action), *tasks_, goal_);
    for (std::size_t k = 0; k < res.rewards.size(); ++k) episode_totals_[k] += res.rewards[k];
    if (res.terminal) break;
  }
  EpisodeRecord record{goal_, episode_totals_};
  begin_episode();
  return record;
}

std::vector<EpisodeRecord> Actor::take_completed_episodes() {
  std::vector<EpisodeRecord> out;
  out.swap(completed_);
  return out;
}

}  // namespace unicorn
