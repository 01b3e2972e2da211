#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "unicorn/experiment.hpp"

using namespace unicorn;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("unicorn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Drops the trailing wall_seconds column of every CSV line.
std::string without_wall_clock(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST(Config, EmptyFileGivesTableDefaults) {
  const ExperimentConfig c = parse_config("", std::string("chain4"));
  EXPECT_EQ(c.run.learner.discount, 0.95);
  EXPECT_EQ(c.run.learner.batch_size, 32);
  EXPECT_EQ(c.run.learner.unroll, 20);
  EXPECT_EQ(c.run.optimizer.learning_rate, 2e-4);
  EXPECT_EQ(c.run.optimizer.decay, 0.99);
  EXPECT_EQ(c.run.optimizer.epsilon, 0.01);
  EXPECT_EQ(c.run.actor.epsilon_end, 0.01);
  EXPECT_EQ(c.run.queue_capacity, 128);
  EXPECT_EQ(c.preset.name, "chain4");
}

TEST(Config, UnknownKeyNamed) {
  try {
    parse_config(R"({"preset":"chain3","learner":{"discont":0.9}})");
    FAIL() << "expected ConfigKeyError";
  } catch (const ConfigKeyError& e) {
    EXPECT_NE(std::string(e.what()).find("learner.discont"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"preset":"chain3","colour":1})"), ConfigKeyError);
  EXPECT_THROW(parse_config(R"({"preset":"chain3","learner":{"discount":1.5}})"), ConfigKeyError);
  EXPECT_THROW(parse_config(R"({"preset":"chain3","run":{"num_actors":"many"}})"), ConfigKeyError);
  EXPECT_THROW(parse_config("{not json"), ConfigKeyError);
  EXPECT_THROW(parse_config("{}"), ConfigKeyError);
}

TEST(Config, RoundTripIsStable) {
  for (const auto& name : preset_names()) {
    const ExperimentConfig c = parse_config(R"({"seed":5,"learner":{"batch_size":8}})", name);
    const std::string once = serialize_config(c);
    const std::string twice = serialize_config(parse_config(once));
    EXPECT_EQ(once, twice) << name;
    EXPECT_EQ(parse_config(once).run.learner.batch_size, 8);
  }
  const ExperimentConfig h = parse_config(R"({"preset":"transfer-zeroshot","holdout":[0,5,10,15]})");
  EXPECT_EQ(serialize_config(parse_config(serialize_config(h))), serialize_config(h));
  EXPECT_EQ(parse_config(serialize_config(h)).preset.tasks.holdout_goals, (std::vector<int>{0, 5, 10, 15}));
}

TEST(Presets, UnknownNameListsValidOnes) {
  try {
    make_preset("multitask9");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("transfer-augmented"), std::string::npos);
  }
}

TEST(Presets, MultiTaskWorlds) {
  const auto m16 = make_preset("multitask16");
  EXPECT_EQ(m16.tasks.num_tasks(), 16);
  EXPECT_EQ(m16.env.total_objects(), 16);
  std::set<std::pair<int, int>> combos;
  for (const auto& o : m16.tasks.object_types) combos.insert({*o.color, *o.shape});
  EXPECT_EQ(combos.size(), 16u);
  const auto m7 = make_preset("multitask7");
  EXPECT_EQ(m7.tasks.num_tasks(), 7);
  EXPECT_EQ(m7.env.width, 8);
  EXPECT_EQ(m7.tasks.behavior_goals.size(), 7u);
}

TEST(Presets, OffPolicyTransferSplit) {
  const auto p = make_preset("transfer-offpolicy");
  EXPECT_EQ(p.tasks.learn_goals.size(), 16u);
  EXPECT_EQ(p.tasks.behavior_goals.size(), 12u);
  EXPECT_EQ(p.tasks.holdout_goals.size(), 4u);
  for (int h : p.tasks.holdout_goals) {
    EXPECT_EQ(p.tasks.tasks[static_cast<std::size_t>(h)].name.rfind("cyan", 0), 0u);
    EXPECT_EQ(std::count(p.tasks.behavior_goals.begin(), p.tasks.behavior_goals.end(), h), 0);
    EXPECT_EQ(std::count(p.tasks.learn_goals.begin(), p.tasks.learn_goals.end(), h), 1);
  }
}

TEST(Presets, ZeroShotTwoHotSplit) {
  const auto p = make_preset("transfer-zeroshot");
  EXPECT_EQ(p.tasks.encoding.dim(), 8);
  EXPECT_EQ(p.tasks.behavior_goals.size(), 12u);
  EXPECT_EQ(p.tasks.learn_goals.size(), 12u);
  EXPECT_EQ(p.tasks.holdout_goals.size(), 4u);
  const auto& m = p.tasks.encoding.matrix;
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(m.row(i).sum(), 2.0);
    EXPECT_EQ(m.row(i).head(4).sum(), 1.0);
    EXPECT_EQ(m.row(i).tail(4).sum(), 1.0);
  }
  for (int h : p.tasks.holdout_goals) {
    for (int t : p.tasks.learn_goals) EXPECT_NE(m.row(h), m.row(t));
  }
  EXPECT_FALSE(p.notes.empty());
  const auto custom = make_preset("transfer-zeroshot", std::vector<int>{0, 5, 10, 15});
  EXPECT_EQ(custom.tasks.holdout_goals, (std::vector<int>{0, 5, 10, 15}));
  EXPECT_THROW(make_preset("transfer-zeroshot", std::vector<int>{16}), std::invalid_argument);
}

TEST(Presets, AugmentedAddsAbstractTasks) {
  const auto p = make_preset("transfer-augmented");
  EXPECT_EQ(p.tasks.num_tasks(), 24);
  EXPECT_EQ(p.tasks.behavior_goals.size(), 20u);
  EXPECT_EQ(p.tasks.holdout_goals.size(), 4u);
  const auto& m = p.tasks.encoding.matrix;
  for (int i = 16; i < 24; ++i) EXPECT_EQ(m.row(i).sum(), 1.0);
  // "any-red" pays for exactly the four red objects.
  const int red = 16;
  EXPECT_EQ(p.tasks.tasks[red].name, "any-red");
  for (int type = 0; type < 16; ++type) {
    const auto r = pseudo_rewards({}, type, p.tasks);
    EXPECT_EQ(r[red], *p.tasks.object_types[static_cast<std::size_t>(type)].color == 0 ? 1.0 : 0.0);
    EXPECT_EQ(r[static_cast<std::size_t>(type)], 1.0);
  }
}

TEST(Presets, ChainWorlds) {
  const auto c4 = make_preset("chain4");
  EXPECT_EQ(c4.tasks.num_tasks(), 4);
  EXPECT_EQ(c4.tasks.behavior_goals.size(), 4u);
  EXPECT_TRUE(c4.env.chain_mode);
  EXPECT_EQ(c4.env.total_objects(), 16);
  EXPECT_EQ(c4.env.episode_length, 1024);
  EXPECT_EQ(c4.tasks.tasks[0].name, "key");
  EXPECT_EQ(c4.tasks.tasks[3].name, "chest");
  EXPECT_EQ(make_preset("chain5").tasks.tasks[4].name, "cake");
  EXPECT_EQ(make_preset("chain3").tasks.num_tasks(), 3);
}

TEST(Presets, ExpertsExpandPerTask) {
  const auto p = make_preset("multitask7");
  const auto agents = expand_agents(p);
  int experts = 0;
  for (const auto& a : agents) experts += a.kind == AgentKind::kExpert;
  EXPECT_EQ(experts, 7);
}

TEST(RunExperiment, WritesRunDirectory) {
  ExperimentConfig c = parse_config(
      R"({"preset":"chain4","agents":["unicorn","glutton"],"run":{"num_actors":1,"total_env_frames":400,
          "eval_every_frames":200,"eval_episodes_per_goal":1},"network":{"repr_dim":8,"hidden_dim":8},
          "env":{"episode_length":50}})");
  const auto out = scratch_dir("rundir");
  std::ostringstream log;
  const ExperimentOutcome o = run_experiment(c, out, log);
  EXPECT_FALSE(o.failed);
  EXPECT_TRUE(std::filesystem::exists(o.run_dir / "config.json"));
  EXPECT_TRUE(std::filesystem::exists(o.run_dir / "unicorn" / "metrics.csv"));
  EXPECT_TRUE(std::filesystem::exists(o.run_dir / "unicorn" / "checkpoints" / "final.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(o.run_dir / "glutton" / "metrics.csv"));
  const std::string summary = read_file(o.run_dir / "summary.txt");
  for (const char* task : {"key", "lock", "door", "chest"}) EXPECT_NE(summary.find(task), std::string::npos);
  EXPECT_NE(summary.find("glutton"), std::string::npos);
  const std::string header = read_file(o.run_dir / "unicorn" / "metrics.csv").substr(0, 60);
  EXPECT_EQ(header.rfind("frames,goal_id,mean_reward,count_key", 0), 0u);
  EXPECT_NO_THROW(load_config(o.run_dir / "config.json"));
}

TEST(RunExperiment, SingleActorCsvIsReproducible) {
  const std::string text =
      R"({"preset":"chain3","agents":["unicorn"],"run":{"num_actors":1,"total_env_frames":400,
          "eval_every_frames":200,"eval_episodes_per_goal":1},"network":{"repr_dim":8,"hidden_dim":8},
          "env":{"episode_length":50}})";
  std::ostringstream log;
  const auto a = run_experiment(parse_config(text), scratch_dir("repro_a"), log);
  const auto b = run_experiment(parse_config(text), scratch_dir("repro_b"), log);
  EXPECT_EQ(without_wall_clock(read_file(a.run_dir / "unicorn" / "metrics.csv")),
            without_wall_clock(read_file(b.run_dir / "unicorn" / "metrics.csv")));
}
