#include "unicorn/learner.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace unicorn {

void Trajectory::validate(int num_tasks) const {
  const auto h = static_cast<std::size_t>(length());
  if (h == 0) throw std::invalid_argument("trajectory: empty");
  if (behavior_goals.size() != h || exploratory.size() != h || terminal.size() != h) {
    throw std::invalid_argument("trajectory: per-step sequences have inconsistent lengths");
  }
  if (observations.cols() != static_cast<Eigen::Index>(h) + 1) {
    throw std::invalid_argument("trajectory: expected H + 1 observations");
  }
  if (rewards.cols() != static_cast<Eigen::Index>(h) || rewards.rows() != num_tasks) {
    throw std::invalid_argument("trajectory: reward matrix must be K x H");
  }
}

int greedy_action(std::span<const double> q_row) {
  int best = 0;
  for (std::size_t a = 1; a < q_row.size(); ++a) {
    if (q_row[a] > q_row[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
  }
  return best;
}

int greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q_row) {
  return greedy_action(std::span<const double>(q_row.data(), static_cast<std::size_t>(q_row.size())));
}

TargetTrace truncated_targets_from_q(const Trajectory& traj, int goal,
                                     const Eigen::Ref<const Eigen::MatrixXd>& q, double discount) {
  const int h = traj.length();
  if (q.cols() != h + 1) throw std::invalid_argument("truncated_targets: need Q for H + 1 observations");
  TargetTrace out;
  out.targets.assign(static_cast<std::size_t>(h), 0.0);
  out.reward_terms.assign(static_cast<std::size_t>(h), 0);
  out.truncated.assign(static_cast<std::size_t>(h), 0);

  auto matches = [&](int s) {
    const auto us = static_cast<std::size_t>(s);
    if (traj.behavior_goals[us] == goal && traj.exploratory[us]) return false;
    return traj.actions[us] == greedy_action(q.col(s));
  };

  for (int t = h - 1; t >= 0; --t) {
    const auto ut = static_cast<std::size_t>(t);
    const double r = traj.rewards(goal, t);
    if (traj.terminal[ut]) {
      out.targets[ut] = r;
      out.reward_terms[ut] = 1;
    } else if (t + 1 == h) {
      out.targets[ut] = r + discount * q.col(h).maxCoeff();
      out.reward_terms[ut] = 1;
    } else if (matches(t + 1)) {
      out.targets[ut] = r + discount * out.targets[ut + 1];
      out.reward_terms[ut] = 1 + out.reward_terms[ut + 1];
      out.truncated[ut] = out.truncated[ut + 1];
    } else {
      out.targets[ut] = r + discount * q.col(t + 1).maxCoeff();
      out.reward_terms[ut] = 1;
      out.truncated[ut] = 1;
    }
  }
  return out;
}

std::vector<double> truncated_targets(const Trajectory& traj, int goal, const NetParams& params,
                                      const TaskSet& tasks, double discount) {
  const Eigen::MatrixXd g = tasks.encoding.matrix.row(goal);
  const BatchForward fwd = forward(params, traj.observations, g);
  return truncated_targets_from_q(traj, goal, fwd.q, discount).targets;
}

LossResult loss(std::span<const Trajectory> batch, const NetParams& params, const TaskSet& tasks,
                const LearnerConfig& config) {
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  const auto& learn = tasks.learn_goals;
  const int n_goals = static_cast<int>(learn.size());
  if (n_goals == 0) throw std::invalid_argument("loss: no learnable goals");

  Eigen::MatrixXd goals(n_goals, tasks.encoding.dim());
  for (int k = 0; k < n_goals; ++k) goals.row(k) = tasks.encoding.matrix.row(learn[static_cast<std::size_t>(k)]);

  Eigen::Index total_obs = 0;
  for (const Trajectory& traj : batch) {
    traj.validate(tasks.num_tasks());
    total_obs += traj.observations.cols();
  }
  Eigen::MatrixXd observations(params.dims.obs_dim, total_obs);
  {
    Eigen::Index col = 0;
    for (const Trajectory& traj : batch) {
      observations.middleCols(col, traj.observations.cols()) = traj.observations;
      col += traj.observations.cols();
    }
  }

  const BatchForward fwd = forward(params, observations, goals);

  LossResult result;
  result.grads = NetParams::zeros(params.dims);
  result.per_goal_td.assign(static_cast<std::size_t>(n_goals), 0.0);
  std::vector<TdTerm> terms;
  std::vector<int> term_goal;
  std::size_t truncated = 0;

  Eigen::MatrixXd q_goal;
  int obs_base = 0;
  for (const Trajectory& traj : batch) {
    const int h = traj.length();
    for (int k = 0; k < n_goals; ++k) {
      const int goal = learn[static_cast<std::size_t>(k)];
      q_goal.resize(params.dims.num_actions, h + 1);
      for (int t = 0; t <= h; ++t) q_goal.col(t) = fwd.q.col(fwd.column(obs_base + t, k));
      const TargetTrace trace = truncated_targets_from_q(traj, goal, q_goal, config.discount);
      for (int t = 0; t < h; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        terms.push_back({obs_base + t, k, traj.actions[ut], trace.targets[ut]});
        truncated += trace.truncated[ut];
      }
    }
    obs_base += h + 1;
  }

  try {
    result.loss = accumulate_gradients(params, observations, goals, fwd, terms, result.grads);
  } catch (const std::domain_error& e) {
    throw std::runtime_error(std::string("learner: ") + e.what());
  }
  if (!std::isfinite(result.loss) || !result.grads.all_finite()) {
    throw std::runtime_error("learner: non-finite loss " + std::to_string(result.loss));
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_goals), 0);
  for (const TdTerm& term : terms) {
    const auto k = static_cast<std::size_t>(term.goal);
    result.per_goal_td[k] += std::abs(term.target - fwd.value(term.obs, term.goal, term.action));
    counts[k] += 1;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) result.per_goal_td[k] /= static_cast<double>(counts[k]);
  }
  result.num_terms = terms.size();
  result.truncation_rate = terms.empty() ? 0.0 : static_cast<double>(truncated) / static_cast<double>(terms.size());
  return result;
}

StepMetrics train_step(std::span<const Trajectory> batch, NetParams& params, OptState& opt,
                       const TaskSet& tasks, const LearnerConfig& config) {
  LossResult l = loss(batch, params, tasks, config);
  rmsprop_step(params, opt, l.grads);
  return {l.loss, l.truncation_rate, std::move(l.per_goal_td)};
}

}  // namespace unicorn
