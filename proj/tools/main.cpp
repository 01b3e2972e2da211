#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "unicorn/checkpoint.hpp"
#include "unicorn/experiment.hpp"
#include "unicorn/harness.hpp"
#include "unicorn/metrics.hpp"
#include "unicorn/oracles/oracles.hpp"

namespace {

using namespace unicorn;

struct RunArgs {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> frames;
  std::optional<int> actors;
  std::string agent;
  std::string out = "runs";
};

int cmd_run(const RunArgs& args) {
  ExperimentConfig cfg = args.config.empty() ? parse_config("", args.preset) : load_config(args.config, args.preset);
  if (args.seed) {
    cfg.run.seed = *args.seed;
    cfg.run.env.seed = *args.seed;
  }
  if (args.frames) cfg.run.total_env_frames = *args.frames;
  if (args.actors) {
    if (*args.actors < 1) throw ConfigKeyError("--actors must be >= 1");
    cfg.run.num_actors = *args.actors;
  }
  if (!args.agent.empty()) {
    cfg.preset.agents = {args.agent};
    (void)expand_agents(cfg.preset);
  }
  const ExperimentOutcome outcome = run_experiment(cfg, args.out, std::cout);
  std::cout << "run directory: " << outcome.run_dir.string() << "\n";
  return outcome.failed ? 1 : 0;
}

int cmd_eval(const std::string& checkpoint, int goal, int episodes, std::uint64_t seed, double epsilon) {
  const std::filesystem::path ckpt(checkpoint);
  auto meta_path = ckpt;
  meta_path.replace_extension(".json");
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw std::runtime_error("missing checkpoint description " + meta_path.string());
  const auto meta = nlohmann::json::parse(meta_in);
  std::optional<std::vector<int>> holdout;
  if (meta.contains("holdout")) holdout = meta.at("holdout").get<std::vector<int>>();
  const ExperimentPreset preset = make_preset(meta.at("preset").get<std::string>(), holdout);
  const AgentSpec agent = AgentSpec::parse(meta.at("agent").get<std::string>(), preset.tasks);
  auto tasks = std::make_shared<const TaskSet>(make_baseline(preset.tasks, agent));
  if (goal < 0 || goal >= tasks->num_tasks()) {
    throw std::invalid_argument("--goal must lie in [0, " + std::to_string(tasks->num_tasks()) + ")");
  }

  const NetParams params = load_checkpoint(ckpt);
  EvalOptions opts;
  opts.episodes = episodes;
  opts.seed = seed;
  opts.epsilon = epsilon;
  const MetricsRow row =
      evaluate(agent.kind == AgentKind::kRandom ? nullptr : &params, preset.env, tasks, goal, opts);

  std::cout << "agent " << agent.label() << ", goal " << tasks->tasks[static_cast<std::size_t>(goal)].name
            << ", " << episodes << " episodes\n";
  std::cout << "mean reward: " << format_number(row.mean_reward) << "\n";
  for (int k = 0; k < tasks->num_tasks(); ++k) {
    std::cout << "  " << tasks->tasks[static_cast<std::size_t>(k)].name << ": "
              << format_number(row.decomposition[static_cast<std::size_t>(k)]) << "\n";
  }
  return 0;
}

int cmd_oracle_targets(std::uint64_t seed, int count) {
  const auto report = oracles::run_target_suite(seed, count);
  std::cout << "trajectories: " << report.trajectories << "\ntargets compared: " << report.targets
            << "\nmismatches: " << report.mismatches << "\n";
  if (report.mismatches) std::cout << "first mismatch: " << report.first_mismatch << "\n";
  return report.mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-conditioned multi-task agent on a grid treasure world"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Train and evaluate the agents of a preset");
  std::string presets;
  for (const auto& n : preset_names()) presets += (presets.empty() ? "" : ", ") + n;
  run->add_option("--preset", run_args.preset, "One of: " + presets)->required();
  run->add_option("--config", run_args.config, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Random seed");
  run->add_option("--frames", run_args.frames, "Environment frame budget per agent");
  run->add_option("--actors", run_args.actors, "Number of actors");
  run->add_option("--agent", run_args.agent, "unicorn, expert:<task>, glutton or random (default: preset's agents)");
  run->add_option("--out", run_args.out, "Output root directory")->capture_default_str();

  std::string checkpoint;
  int goal = 0;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  double eval_epsilon = 0.01;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint on one goal");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--goal", goal, "Goal (task index)")->required();
  eval->add_option("--episodes", episodes, "Episodes to play")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed")->capture_default_str();
  eval->add_option("--epsilon", eval_epsilon, "Exploration rate")->capture_default_str()->check(CLI::Range(0.0, 1.0));

  std::uint64_t oracle_seed = 0;
  int oracle_count = 1000;
  auto* oracle = app.add_subcommand("oracle-targets", "Check n-step targets against a brute-force oracle");
  oracle->add_option("--seed", oracle_seed, "Seed for random trajectories")->capture_default_str();
  oracle->add_option("--count", oracle_count, "Trajectories to check")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*eval) return cmd_eval(checkpoint, goal, episodes, eval_seed, eval_epsilon);
    if (*oracle) return cmd_oracle_targets(oracle_seed, oracle_count);
  } catch (const ConfigKeyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
