#include <benchmark/benchmark.h>

#include <atomic>
#include <memory>

#include "unicorn/actor.hpp"
#include "unicorn/env.hpp"
#include "unicorn/experiment.hpp"
#include "unicorn/learner.hpp"
#include "unicorn/uvfa.hpp"

namespace {

using namespace unicorn;

struct World {
  ExperimentPreset preset = make_preset("multitask7");
  std::shared_ptr<const TaskSet> tasks = std::make_shared<const TaskSet>(preset.tasks);
  NetDims dims{observation_size(preset.env), 128, preset.tasks.encoding.dim(), 256, kNumActions,
               preset.tasks.num_tasks()};
  NetParams params = init_params(dims, 1);
};

std::vector<Trajectory> rollouts(World& w, int count) {
  Actor actor(ActorConfig{}, w.preset.env, w.tasks, 3);
  std::atomic<std::uint64_t> frames{0};
  ParameterSnapshot snap{w.params, 0};
  std::vector<Trajectory> out;
  for (int i = 0; i < count; ++i) out.push_back(actor.run_rollout(&snap, frames));
  return out;
}

void BM_EnvStep(benchmark::State& state) {
  World w;
  WorldState s = reset(w.preset.env, 1);
  int a = 0;
  for (auto _ : state) {
    if (s.terminal()) s = reset(w.preset.env, static_cast<std::uint64_t>(a));
    benchmark::DoNotOptimize(step(s, action_from_index(a++ % kNumActions), *w.tasks, 0));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EnvStep);

void BM_Observe(benchmark::State& state) {
  World w;
  const WorldState s = reset(w.preset.env, 1);
  Eigen::VectorXd obs(observation_size(s));
  for (auto _ : state) {
    observe_into(s, obs);
    benchmark::DoNotOptimize(obs.data());
  }
}
BENCHMARK(BM_Observe);

void BM_ActingForward(benchmark::State& state) {
  World w;
  const Eigen::VectorXd obs = observe(reset(w.preset.env, 1));
  const Eigen::VectorXd goal = w.preset.tasks.encoding.goal(0);
  for (auto _ : state) benchmark::DoNotOptimize(q_row(w.params, obs, goal));
}
BENCHMARK(BM_ActingForward);

void BM_ActorRollout(benchmark::State& state) {
  World w;
  Actor actor(ActorConfig{}, w.preset.env, w.tasks, 3);
  std::atomic<std::uint64_t> frames{0};
  ParameterSnapshot snap{w.params, 0};
  for (auto _ : state) benchmark::DoNotOptimize(actor.run_rollout(&snap, frames));
  state.SetItemsProcessed(static_cast<std::int64_t>(frames.load()));
}
BENCHMARK(BM_ActorRollout)->Unit(benchmark::kMicrosecond);

void BM_LearnerLoss(benchmark::State& state) {
  World w;
  const auto batch = rollouts(w, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss(batch, w.params, w.preset.tasks, LearnerConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_LearnerLoss)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  World w;
  const auto batch = rollouts(w, static_cast<int>(state.range(0)));
  NetParams p = w.params;
  OptState opt = make_opt_state(p);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(batch, p, opt, w.preset.tasks, LearnerConfig{}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
