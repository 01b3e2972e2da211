#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "fixtures.hpp"
#include "unicorn/harness.hpp"
#include "unicorn/queue.hpp"

using namespace unicorn;
using unicorn::testing::chain_tasks;
using unicorn::testing::env_for;
using unicorn::testing::object_tasks;

namespace {

RunConfig tiny_run(const TaskSet& ts, int copies = 1) {
  RunConfig c;
  c.tasks = ts;
  c.env = env_for(ts, copies);
  c.env.episode_length = 40;
  c.num_actors = 1;
  c.total_env_frames = 400;
  c.eval_every_frames = 200;
  c.eval_episodes_per_goal = 1;
  c.learner.batch_size = 2;
  c.queue_capacity = 8;
  c.repr_dim = 8;
  c.hidden_dim = 8;
  return c;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Queue, BlocksWhenFullAndDropsNothing) {
  BoundedQueue<int> q(2);
  EXPECT_TRUE(q.push(1));
  EXPECT_TRUE(q.push(2));
  EXPECT_FALSE(q.try_push(3));
  std::atomic<bool> pushed{false};
  std::thread producer([&] {
    q.push(3);
    pushed = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_FALSE(pushed.load());
  EXPECT_EQ(q.pop(), 1);
  producer.join();
  EXPECT_TRUE(pushed.load());
  EXPECT_EQ(q.pop_batch(2), (std::vector<int>{2, 3}));
  EXPECT_EQ(q.pushed(), 3u);
  EXPECT_EQ(q.popped(), 3u);
}

TEST(Queue, CloseReleasesWaitersAndKeepsResidue) {
  BoundedQueue<int> q(4);
  q.push(7);
  std::thread consumer([&] { EXPECT_TRUE(q.pop_batch(3).empty()); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  q.close();
  consumer.join();
  EXPECT_FALSE(q.push(8));
  EXPECT_EQ(q.size(), 1u);
  EXPECT_EQ(q.pop(), 7);
  EXPECT_EQ(q.pop(), std::nullopt);
}

TEST(Queue, ManyProducersExactAccounting) {
  BoundedQueue<std::pair<int, int>> q(16);
  std::vector<std::jthread> producers;
  for (int p = 0; p < 4; ++p) {
    producers.emplace_back([&, p] {
      for (int i = 0; i < 1000; ++i) q.push({p, i});
    });
  }
  std::set<std::pair<int, int>> seen;
  for (int n = 0; n < 4000; ++n) seen.insert(*q.pop());
  producers.clear();
  EXPECT_EQ(seen.size(), 4000u);
  EXPECT_EQ(q.pushed(), 4000u);
}

TEST(Baselines, ExpertKeepsOnlyItsTask) {
  const TaskSet ts = object_tasks(5);
  const TaskSet e = make_baseline(ts, {AgentKind::kExpert, 3});
  EXPECT_EQ(e.behavior_goals, std::vector<int>{3});
  EXPECT_EQ(e.learn_goals, std::vector<int>{3});
  EXPECT_EQ(e.encoding.dim(), 1);
  EXPECT_EQ(e.encoding.matrix(3, 0), 1.0);
  EXPECT_THROW(make_baseline(ts, {AgentKind::kExpert, 5}), std::invalid_argument);
  EXPECT_THROW(AgentSpec::parse("expert:9", ts), std::invalid_argument);
  EXPECT_EQ(AgentSpec::parse("expert:obj2", ts), (AgentSpec{AgentKind::kExpert, 2}));
}

TEST(Baselines, GluttonRewardsSumOfTasks) {
  const TaskSet ts = chain_tasks(4);
  const TaskSet g = make_baseline(ts, {AgentKind::kGlutton, -1});
  EXPECT_EQ(g.num_tasks(), 5);
  EXPECT_EQ(g.behavior_goals, std::vector<int>{4});
  EXPECT_EQ(pseudo_rewards({}, 0, g).back(), 1.0);
  EXPECT_EQ(pseudo_rewards(std::vector<int>{1, 0}, 2, g).back(), 1.0);
  EXPECT_EQ(pseudo_rewards(std::vector<int>{0}, 2, g).back(), 0.0);
}

TEST(Baselines, UnicornAndRandomUnchanged) {
  const TaskSet ts = object_tasks(3);
  const TaskSet u = make_baseline(ts, {AgentKind::kUnicorn, -1});
  EXPECT_EQ(u.tasks, ts.tasks);
  EXPECT_EQ(u.behavior_goals, ts.behavior_goals);
}

TEST(Evaluate, RandomPolicyCollectsObjects) {
  const TaskSet ts = object_tasks(16);
  auto tasks = std::make_shared<const TaskSet>(ts);
  const EnvConfig env = env_for(ts, 1);
  for (int goal : {0, 7, 15}) {
    const MetricsRow row = evaluate(nullptr, env, tasks, goal, {100, 0.01, 3});
    EXPECT_GT(row.mean_reward, 0.0);
    EXPECT_EQ(row.episodes, 100);
  }
}

TEST(Evaluate, ChainOrderingHoldsForAnyPolicy) {
  const TaskSet ts = chain_tasks(4);
  auto tasks = std::make_shared<const TaskSet>(ts);
  const EnvConfig env = env_for(ts, 4);
  const NetParams p = init_params(NetDims{observation_size(env), 8, 4, 8, kNumActions, 4}, 2);
  for (int goal = 0; goal < 4; ++goal) {
    EXPECT_NO_THROW(evaluate(&p, env, tasks, goal, {5, 0.3, 1}));
    EXPECT_NO_THROW(evaluate(nullptr, env, tasks, goal, {5, 0.3, 1}));
  }
}

TEST(Evaluate, FullEpsilonMatchesRandomBaseline) {
  const TaskSet ts = object_tasks(8);
  auto tasks = std::make_shared<const TaskSet>(ts);
  const EnvConfig env = env_for(ts, 2);
  const NetParams p = init_params(NetDims{observation_size(env), 8, 8, 8, kNumActions, 8}, 2);
  std::vector<double> a;
  std::vector<double> b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(evaluate(&p, env, tasks, 1, {1, 1.0, 100 + static_cast<std::uint64_t>(i)}).mean_reward);
    b.push_back(evaluate(nullptr, env, tasks, 1, {1, 0.0, 900 + static_cast<std::uint64_t>(i)}).mean_reward);
  }
  const double se = std::sqrt(sample_var(a) / 60.0 + sample_var(b) / 60.0);
  EXPECT_LT(std::abs(mean(a) - mean(b)), 4.0 * se);
}

TEST(Run, SingleUnrollSingleTrainStep) {
  RunConfig c = tiny_run(object_tasks(2));
  c.total_env_frames = 20;
  c.learner.batch_size = 1;
  const RunResult r = run(c);
  ASSERT_FALSE(r.failed) << r.failure;
  EXPECT_EQ(r.stats.frames, 20u);
  EXPECT_EQ(r.stats.pushed, 1u);
  EXPECT_EQ(r.stats.consumed, 1u);
  EXPECT_EQ(r.stats.train_steps, 1u);
}

TEST(Run, SingleActorIsBitDeterministic) {
  const RunConfig c = tiny_run(chain_tasks(3), 4);
  const RunResult a = run(c);
  const RunResult b = run(c);
  ASSERT_FALSE(a.failed) << a.failure;
  EXPECT_TRUE(a.final_params == b.final_params);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].decomposition, b.rows[i].decomposition);
    EXPECT_EQ(a.rows[i].loss, b.rows[i].loss);
  }
}

TEST(Run, ThreadedAccountingIsExact) {
  RunConfig c = tiny_run(object_tasks(4));
  c.num_actors = 4;
  c.total_env_frames = 2000;
  c.learner.batch_size = 3;
  c.queue_capacity = 3;
  const RunResult r = run(c);
  ASSERT_FALSE(r.failed) << r.failure;
  EXPECT_EQ(r.stats.pushed, r.stats.consumed + r.stats.residual);
  EXPECT_EQ(r.stats.pushed, 100u);
  EXPECT_EQ(r.stats.frames, 2000u);
  EXPECT_EQ(r.stats.duplicate_tags, 0u);
  EXPECT_EQ(r.stats.train_steps, r.stats.consumed / 3);
}

TEST(Run, EvaluatesAtStartCadenceAndEnd) {
  RunConfig c = tiny_run(object_tasks(2));
  c.total_env_frames = 500;
  c.eval_every_frames = 200;
  const RunResult r = run(c);
  std::set<std::uint64_t> points;
  for (const auto& row : r.rows) points.insert(row.frames);
  EXPECT_EQ(points, (std::set<std::uint64_t>{0, 200, 400, 500}));
}

TEST(Run, ExpertMatchesSingleTaskUnicorn) {
  TaskSet multi = object_tasks(3);
  RunConfig e = tiny_run(multi);
  e.agent = {AgentKind::kExpert, 1};
  TaskSet single = make_baseline(multi, e.agent);
  RunConfig u = tiny_run(multi);
  u.tasks = single;
  const RunResult re = run(e);
  const RunResult ru = run(u);
  ASSERT_FALSE(re.failed) << re.failure;
  EXPECT_TRUE(re.final_params == ru.final_params);
}

TEST(Run, RandomAgentNeverTrains) {
  RunConfig c = tiny_run(object_tasks(2));
  c.agent = {AgentKind::kRandom, -1};
  const RunResult r = run(c);
  EXPECT_EQ(r.stats.train_steps, 0u);
  EXPECT_GT(r.stats.consumed, 0u);
}

TEST(Run, ExperienceMultiplierScalesReportedFrames) {
  RunConfig c = tiny_run(object_tasks(2));
  c.experience_multiplier = 3;
  const RunResult r = run(c);
  EXPECT_EQ(r.rows.back().frames, 1200u);
}

TEST(Run, FailureIsRecordedNotThrown) {
  RunConfig c = tiny_run(object_tasks(2));
  c.optimizer.learning_rate = 1e300;
  c.total_env_frames = 2000;
  const RunResult r = run(c);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.failure.empty());
}
