#include "unicorn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include "unicorn/checkpoint.hpp"
#include "unicorn/queue.hpp"

namespace unicorn {
namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Clock = std::chrono::steady_clock;

// Learner-side state: parameters, optimizer, evaluation cadence and the
// bookkeeping needed to audit queue integrity.
class LearnerLoop {
 public:
  LearnerLoop(const RunConfig& config, std::shared_ptr<const TaskSet> tasks, SnapshotStore& store,
              NetParams params, MetricsSink* sink, Clock::time_point start)
      : config_(config),
        tasks_(std::move(tasks)),
        store_(store),
        params_(std::move(params)),
        opt_(make_opt_state(params_, config.optimizer)),
        sink_(sink),
        start_(start),
        trains_(config.agent.kind != AgentKind::kRandom) {}

  void consume(std::vector<Trajectory> batch) {
    for (const Trajectory& t : batch) {
      if (!tags_.emplace(t.actor_id, t.sequence).second) ++stats.duplicate_tags;
    }
    stats.consumed += batch.size();
    if (!trains_) return;
    const StepMetrics m = train_step(batch, params_, opt_, *tasks_, config_.learner);
    store_.publish(params_);
    ++stats.train_steps;
    loss_sum_ += m.loss;
    trunc_sum_ += m.truncation_rate;
    ++window_steps_;
  }

  void maybe_evaluate(std::uint64_t frames) {
    if (frames >= next_eval_) {
      evaluate_all(frames);
      if (config_.eval_every_frames == 0) {
        next_eval_ = UINT64_MAX;
      } else {
        while (next_eval_ <= frames) next_eval_ += config_.eval_every_frames;
      }
    }
  }

  void finish(std::uint64_t frames) {
    if (!last_eval_frames_ || *last_eval_frames_ != frames) evaluate_all(frames);
  }

  const NetParams& params() const { return params_; }
  std::vector<MetricsRow> rows;
  RunStats stats;

 private:
  void evaluate_all(std::uint64_t frames) {
    const double loss = window_steps_ ? loss_sum_ / static_cast<double>(window_steps_) : 0.0;
    const double trunc = window_steps_ ? trunc_sum_ / static_cast<double>(window_steps_) : 0.0;
    loss_sum_ = trunc_sum_ = 0.0;
    window_steps_ = 0;
    const NetParams* policy = trains_ ? &params_ : nullptr;
    const bool chain = tasks_->has_chain_tasks();
    for (int goal : tasks_->evaluation_goals()) {
      EvalOptions opts;
      opts.episodes = config_.eval_episodes_per_goal;
      opts.epsilon = config_.actor.epsilon_end;
      opts.seed = mix_seed(config_.seed, 1000 + static_cast<std::uint64_t>(goal));
      MetricsRow row = evaluate(policy, config_.env, tasks_, goal, opts);
      if (chain) stats.chain_episodes_checked += static_cast<std::uint64_t>(row.episodes);
      row.frames = frames * config_.experience_multiplier;
      row.loss = loss;
      row.truncation_rate = trunc;
      row.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
      if (sink_) sink_->submit(row);
      rows.push_back(std::move(row));
    }
    last_eval_frames_ = frames;
  }

  const RunConfig& config_;
  std::shared_ptr<const TaskSet> tasks_;
  SnapshotStore& store_;
  NetParams params_;
  OptState opt_;
  MetricsSink* sink_;
  Clock::time_point start_;
  bool trains_;
  std::set<std::pair<int, std::uint64_t>> tags_;
  std::uint64_t next_eval_ = 0;
  std::optional<std::uint64_t> last_eval_frames_;
  double loss_sum_ = 0.0;
  double trunc_sum_ = 0.0;
  std::uint64_t window_steps_ = 0;
};

}  // namespace

std::string AgentSpec::label() const {
  switch (kind) {
    case AgentKind::kUnicorn: return "unicorn";
    case AgentKind::kExpert: return "expert:" + std::to_string(task);
    case AgentKind::kGlutton: return "glutton";
    case AgentKind::kRandom: return "random";
  }
  return "unknown";
}

AgentSpec AgentSpec::parse(std::string_view text, const TaskSet& tasks) {
  if (text == "unicorn") return {AgentKind::kUnicorn, -1};
  if (text == "glutton") return {AgentKind::kGlutton, -1};
  if (text == "random") return {AgentKind::kRandom, -1};
  constexpr std::string_view prefix = "expert:";
  if (text.starts_with(prefix)) {
    const std::string_view arg = text.substr(prefix.size());
    int index = -1;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), index);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      index = -1;
      for (int i = 0; i < tasks.num_tasks(); ++i) {
        if (tasks.tasks[static_cast<std::size_t>(i)].name == arg) index = i;
      }
    }
    if (index < 0 || index >= tasks.num_tasks()) {
      throw std::invalid_argument("expert over undefined task '" + std::string(arg) + "'");
    }
    return {AgentKind::kExpert, index};
  }
  throw std::invalid_argument("unknown agent '" + std::string(text) +
                              "' (expected unicorn, expert:<task>, glutton or random)");
}

void RunConfig::validate() const {
  if (num_actors < 1) throw std::invalid_argument("run: num_actors must be >= 1");
  if (learner.batch_size < 1) throw std::invalid_argument("run: batch_size must be >= 1");
  if (queue_capacity < learner.batch_size) throw std::invalid_argument("run: queue_capacity must be >= batch_size");
  if (!(learner.discount >= 0.0 && learner.discount < 1.0)) {
    throw std::invalid_argument("run: discount must lie in [0, 1)");
  }
  if (learner.unroll < 1) throw std::invalid_argument("run: unroll must be >= 1");
  if (eval_episodes_per_goal < 1) throw std::invalid_argument("run: eval_episodes_per_goal must be >= 1");
  if (experience_multiplier < 1) throw std::invalid_argument("run: experience_multiplier must be >= 1");
  actor.validate();
  env.validate();
  tasks.validate();
  if (static_cast<int>(tasks.object_types.size()) != env.num_types() ||
      !std::equal(tasks.object_types.begin(), tasks.object_types.end(), env.object_types.begin())) {
    throw std::invalid_argument("run: task set and environment disagree on object types");
  }
  if (agent.kind == AgentKind::kExpert && (agent.task < 0 || agent.task >= tasks.num_tasks())) {
    throw std::invalid_argument("run: expert over undefined task");
  }
}

TaskSet make_baseline(const TaskSet& tasks, const AgentSpec& agent) {
  switch (agent.kind) {
    case AgentKind::kUnicorn:
    case AgentKind::kRandom:
      return tasks;
    case AgentKind::kExpert: {
      if (agent.task < 0 || agent.task >= tasks.num_tasks()) {
        throw std::invalid_argument("make_baseline: expert over undefined task");
      }
      TaskSet out = tasks;
      out.behavior_goals = {agent.task};
      out.learn_goals = {agent.task};
      out.holdout_goals.clear();
      out.encoding.scheme = GoalScheme::kConstant;
      out.encoding.matrix = Eigen::MatrixXd::Zero(tasks.num_tasks(), 1);
      out.encoding.matrix(agent.task, 0) = 1.0;
      return out;
    }
    case AgentKind::kGlutton: {
      TaskSet out = tasks;
      out.tasks.erase(std::remove_if(out.tasks.begin(), out.tasks.end(),
                                     [](const TaskSpec& t) { return t.kind == TaskKind::kGluttonSum; }),
                      out.tasks.end());
      const int glutton = out.num_tasks();
      out.tasks.push_back({TaskKind::kGluttonSum, 0, "glutton"});
      out.behavior_goals = {glutton};
      out.learn_goals = {glutton};
      out.holdout_goals.clear();
      out.encoding.scheme = GoalScheme::kConstant;
      out.encoding.matrix = Eigen::MatrixXd::Zero(glutton + 1, 1);
      out.encoding.matrix(glutton, 0) = 1.0;
      return out;
    }
  }
  throw std::invalid_argument("make_baseline: unknown agent kind");
}

NetDims net_dims(const RunConfig& config, const TaskSet& tasks) {
  NetDims d;
  d.obs_dim = observation_size(config.env);
  d.repr_dim = config.repr_dim;
  d.goal_dim = tasks.encoding.dim();
  d.hidden_dim = config.hidden_dim;
  d.num_actions = kNumActions;
  d.num_goals = tasks.num_tasks();
  return d;
}

MetricsRow evaluate(const NetParams* params, const EnvConfig& env, const std::shared_ptr<const TaskSet>& tasks,
                    int goal, const EvalOptions& options) {
  ActorConfig cfg;
  cfg.evaluation_mode = true;
  cfg.fixed_goal = goal;
  cfg.fixed_epsilon = options.epsilon;
  cfg.epsilon_end = std::min(options.epsilon, 1.0);
  cfg.epsilon_start = 1.0;
  Actor actor(cfg, env, tasks, options.seed);

  std::map<int, int> chain_task;  // chain position -> task index
  for (int i = 0; i < tasks->num_tasks(); ++i) {
    const TaskSpec& t = tasks->tasks[static_cast<std::size_t>(i)];
    if (t.kind == TaskKind::kChainStep) chain_task[t.target] = i;
  }

  MetricsRow row;
  row.goal_id = goal;
  row.decomposition.assign(static_cast<std::size_t>(tasks->num_tasks()), 0.0);
  for (int e = 0; e < options.episodes; ++e) {
    const EpisodeRecord rec = actor.run_episode(params, options.epsilon);
    for (auto it = chain_task.begin(); it != chain_task.end(); ++it) {
      const auto next = std::next(it);
      if (next == chain_task.end()) break;
      const double here = rec.task_totals[static_cast<std::size_t>(it->second)];
      const double deeper = rec.task_totals[static_cast<std::size_t>(next->second)];
      if (deeper > here) {
        throw std::logic_error("chain ordering violated: task " + tasks->tasks[static_cast<std::size_t>(next->second)].name +
                               " paid more often than its prerequisite");
      }
    }
    for (std::size_t k = 0; k < row.decomposition.size(); ++k) row.decomposition[k] += rec.task_totals[k];
  }
  for (double& c : row.decomposition) c /= static_cast<double>(options.episodes);
  row.mean_reward = row.decomposition[static_cast<std::size_t>(goal)];
  row.episodes = options.episodes;
  return row;
}

RunResult run(const RunConfig& config, MetricsSink* sink) {
  config.validate();
  const auto start = Clock::now();
  auto tasks = std::make_shared<const TaskSet>(make_baseline(config.tasks, config.agent));
  tasks->validate();

  RunResult result;
  result.agent = config.agent;
  result.tasks = *tasks;

  const NetDims dims = net_dims(config, *tasks);
  NetParams initial = init_params(dims, mix_seed(config.seed, 0));
  SnapshotStore store(initial);
  BoundedQueue<Trajectory> queue(static_cast<std::size_t>(config.queue_capacity));
  std::atomic<std::uint64_t> frames{0};
  std::atomic<std::uint64_t> reserved{0};
  const auto unroll = static_cast<std::uint64_t>(config.learner.unroll);
  const auto batch = static_cast<std::size_t>(config.learner.batch_size);
  const bool random_policy = config.agent.kind == AgentKind::kRandom;

  auto claim = [&] {
    const std::uint64_t prev = reserved.fetch_add(unroll);
    return prev + unroll <= config.total_env_frames;
  };
  auto make_actor = [&](int id) {
    ActorConfig ac = config.actor;
    ac.actor_id = id;
    ac.unroll = config.learner.unroll;
    ac.evaluation_mode = false;
    ac.fixed_goal.reset();
    if (random_policy) ac.fixed_epsilon = 1.0;
    return Actor(ac, config.env, tasks, mix_seed(config.seed, 100 + static_cast<std::uint64_t>(id)));
  };

  LearnerLoop learner(config, tasks, store, std::move(initial), sink, start);
  std::mutex failure_mutex;
  auto fail = [&](const std::string& what) {
    std::lock_guard lock(failure_mutex);
    if (!result.failed) {
      result.failed = true;
      result.failure = what;
    }
    queue.close();
  };

  const bool lockstep = config.schedule == Schedule::kLockstep || config.num_actors == 1;
  if (lockstep) {
    try {
      std::vector<Actor> actors;
      for (int i = 0; i < config.num_actors; ++i) actors.push_back(make_actor(i));
      learner.maybe_evaluate(0);
      bool progressed = true;
      while (progressed && !result.failed) {
        progressed = false;
        for (Actor& actor : actors) {
          if (!claim()) break;
          auto snapshot = store.latest();
          queue.push(actor.run_rollout(random_policy ? nullptr : snapshot.get(), frames));
          progressed = true;
          while (queue.size() >= batch) learner.consume(queue.pop_batch(batch));
          learner.maybe_evaluate(frames.load());
        }
      }
      learner.finish(frames.load());
    } catch (const std::exception& e) {
      fail(e.what());
    }
  } else {
    std::atomic<int> active{config.num_actors};
    std::atomic<bool> stop{false};
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(config.num_actors));
    for (int i = 0; i < config.num_actors; ++i) {
      workers.emplace_back([&, i] {
        try {
          Actor actor = make_actor(i);
          while (!stop.load() && claim()) {
            auto snapshot = store.latest();
            if (!queue.push(actor.run_rollout(random_policy ? nullptr : snapshot.get(), frames))) break;
          }
        } catch (const std::exception& e) {
          stop = true;
          fail(std::string("actor ") + std::to_string(i) + ": " + e.what());
        }
        if (active.fetch_sub(1) == 1) queue.close();
      });
    }
    try {
      learner.maybe_evaluate(0);
      while (true) {
        auto items = queue.pop_batch(batch);
        if (items.empty()) break;
        learner.consume(std::move(items));
        learner.maybe_evaluate(frames.load());
      }
      if (!result.failed) learner.finish(frames.load());
    } catch (const std::exception& e) {
      stop = true;
      fail(std::string("learner: ") + e.what());
    }
    workers.clear();
  }

  result.rows = std::move(learner.rows);
  result.stats = learner.stats;
  result.stats.frames = frames.load();
  result.stats.pushed = queue.pushed();
  result.stats.residual = queue.size();
  result.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.final_params = learner.params();

  if (config.checkpoint_dir) {
    try {
      std::filesystem::create_directories(*config.checkpoint_dir);
      save_checkpoint(*config.checkpoint_dir / "final.ckpt", result.final_params);
    } catch (const std::exception& e) {
      if (!result.failed) {
        result.failed = true;
        result.failure = std::string("checkpoint: ") + e.what();
      }
    }
  }
  return result;
}

}  // namespace unicorn
