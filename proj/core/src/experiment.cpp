#include "unicorn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "unicorn/checkpoint.hpp"
#include "unicorn/metrics.hpp"

namespace unicorn {
namespace {

using nlohmann::json;

constexpr std::array<const char*, kNumColors> kColors{"red", "green", "blue", "cyan"};
constexpr std::array<const char*, kNumShapes> kShapes{"cassette", "chair", "balloon", "guitar"};
constexpr std::array<const char*, 5> kRoles{"key", "lock", "door", "chest", "cake"};
constexpr int kCyan = 3;

std::vector<ObjectType> color_shape_types(int count) {
  std::vector<ObjectType> types;
  for (int id = 0; id < count; ++id) {
    // Ids enumerate color-major in the 16-type worlds; the 7-type world
    // cycles colors first so every color appears.
    const int color = count == kNumColors * kNumShapes ? id / kNumShapes : id % kNumColors;
    const int shape = count == kNumColors * kNumShapes ? id % kNumShapes : id / kNumColors;
    types.push_back({id, color, shape, std::nullopt});
  }
  return types;
}

std::string object_name(const ObjectType& o) {
  if (o.role) return role_name(*o.role);
  return color_name(*o.color) + "-" + shape_name(*o.shape);
}

Eigen::MatrixXd one_hot(int k) { return Eigen::MatrixXd::Identity(k, k); }

TaskSet single_object_tasks(const std::vector<ObjectType>& types) {
  TaskSet ts;
  ts.object_types = types;
  for (const auto& o : types) ts.tasks.push_back({TaskKind::kSingleObject, o.id, object_name(o)});
  ts.encoding = {GoalScheme::kOneHot, one_hot(static_cast<int>(types.size()))};
  return ts;
}

Eigen::MatrixXd two_hot(const std::vector<ObjectType>& types) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(types.size()), kNumColors + kNumShapes);
  for (const auto& o : types) {
    m(o.id, *o.color) = 1.0;
    m(o.id, kNumColors + *o.shape) = 1.0;
  }
  return m;
}

std::vector<int> range(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<int> complement(int n, const std::vector<int>& excluded) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) out.push_back(i);
  }
  return out;
}

void check_holdout(const std::vector<int>& holdout, int n) {
  std::set<int> seen;
  for (int h : holdout) {
    if (h < 0 || h >= n) throw std::invalid_argument("holdout index " + std::to_string(h) + " out of range");
    if (!seen.insert(h).second) throw std::invalid_argument("holdout index " + std::to_string(h) + " repeated");
  }
  if (static_cast<int>(holdout.size()) >= n) throw std::invalid_argument("holdout leaves no training tasks");
}

EnvConfig grid_env(std::vector<ObjectType> types, int copies, int episode_length, bool chain) {
  EnvConfig env;
  env.width = 8;
  env.height = 8;
  env.object_counts.assign(types.size(), copies);
  env.object_types = std::move(types);
  env.episode_length = episode_length;
  env.chain_mode = chain;
  return env;
}

// ---------------------------------------------------------------- config io

template <class T>
T take(const json& obj, const std::string& section, const char* key, T fallback, std::set<std::string>& seen) {
  seen.insert(key);
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigKeyError("config: key '" + section + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, const std::string& section, const std::set<std::string>& seen) {
  for (const auto& [key, _] : obj.items()) {
    if (!seen.count(key)) throw ConfigKeyError("config: unknown key '" + section + key + "'");
  }
}

const json& section(const json& root, const char* name) {
  static const json empty = json::object();
  if (!root.contains(name)) return empty;
  const json& s = root.at(name);
  if (!s.is_object()) throw ConfigKeyError(std::string("config: key '") + name + "' must be an object");
  return s;
}

std::string schedule_name(Schedule s) { return s == Schedule::kLockstep ? "lockstep" : "threaded"; }
std::string collect_name(CollectMode m) {
  return m == CollectMode::kConditionalPickup ? "conditional-pickup" : "always-collect";
}

template <class Fn>
void checked(const char* key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigKeyError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigKeyError(std::string("config: key '") + key + "': " + e.what());
  }
}

std::string agent_dir_name(const std::string& label) {
  std::string out = label;
  std::replace(out.begin(), out.end(), ':', '-');
  return out;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return out.str();
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"multitask7",        "multitask16",       "transfer-offpolicy",
                                              "transfer-zeroshot", "transfer-augmented", "chain3",
                                              "chain4",            "chain5"};
  return names;
}

std::string color_name(int color) { return kColors.at(static_cast<std::size_t>(color)); }
std::string shape_name(int shape) { return kShapes.at(static_cast<std::size_t>(shape)); }
std::string role_name(int role) { return kRoles.at(static_cast<std::size_t>(role)); }

ExperimentPreset make_preset(std::string_view name, const std::optional<std::vector<int>>& holdout) {
  ExperimentPreset p;
  p.name = std::string(name);
  const int full = kNumColors * kNumShapes;

  if (name == "multitask7" || name == "multitask16") {
    const int t = name == "multitask7" ? 7 : full;
    auto types = color_shape_types(t);
    p.tasks = single_object_tasks(types);
    p.tasks.behavior_goals = p.tasks.learn_goals = range(t);
    p.env = grid_env(types, t == full ? 1 : 2, 512, false);
    p.agents = {"unicorn", "experts", "glutton", "random"};
    p.total_env_frames = t == full ? 4'000'000 : 2'000'000;
    p.eval_every_frames = 200'000;
    if (holdout) throw std::invalid_argument("holdout override only applies to transfer presets");
  } else if (name == "transfer-offpolicy") {
    auto types = color_shape_types(full);
    p.tasks = single_object_tasks(types);
    std::vector<int> held;
    for (const auto& o : types) {
      if (*o.color == kCyan) held.push_back(o.id);
    }
    if (holdout) held = *holdout;
    check_holdout(held, full);
    p.tasks.behavior_goals = complement(full, held);
    p.tasks.learn_goals = range(full);
    p.tasks.holdout_goals = held;
    p.env = grid_env(types, 1, 512, false);
    p.agents = {"unicorn", "random"};
    p.total_env_frames = 3'000'000;
    p.eval_every_frames = 250'000;
  } else if (name == "transfer-zeroshot" || name == "transfer-augmented") {
    auto types = color_shape_types(full);
    p.tasks = single_object_tasks(types);
    p.tasks.encoding = {GoalScheme::kTwoHot, two_hot(types)};
    std::vector<int> held;
    for (const auto& o : types) {
      if (*o.shape == kNumShapes - 1) held.push_back(o.id);
    }
    if (holdout) {
      held = *holdout;
    } else {
      p.notes.push_back("hold-out split is a declared default (every " + shape_name(kNumShapes - 1) +
                        " task); override with \"holdout\"");
    }
    check_holdout(held, full);
    std::vector<int> train = complement(full, held);
    if (name == "transfer-augmented") {
      p.tasks.encoding.scheme = GoalScheme::kAugmented;
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(full + kNumColors + kNumShapes, kNumColors + kNumShapes);
      m.topRows(full) = p.tasks.encoding.matrix;
      for (int c = 0; c < kNumColors; ++c) {
        p.tasks.tasks.push_back({TaskKind::kAbstractColor, c, "any-" + color_name(c)});
        m(full + c, c) = 1.0;
        train.push_back(full + c);
      }
      for (int s = 0; s < kNumShapes; ++s) {
        p.tasks.tasks.push_back({TaskKind::kAbstractShape, s, "any-" + shape_name(s)});
        m(full + kNumColors + s, kNumColors + s) = 1.0;
        train.push_back(full + kNumColors + s);
      }
      p.tasks.encoding.matrix = m;
    }
    p.tasks.behavior_goals = train;
    p.tasks.learn_goals = train;
    p.tasks.holdout_goals = held;
    p.env = grid_env(types, 1, 512, false);
    p.agents = {"unicorn", "random"};
    p.total_env_frames = 2'000'000;
    p.eval_every_frames = 250'000;
  } else if (name == "chain3" || name == "chain4" || name == "chain5") {
    const int length = name.back() - '0';
    std::vector<ObjectType> types;
    for (int r = 0; r < length; ++r) types.push_back({r, std::nullopt, std::nullopt, r});
    p.tasks.object_types = types;
    for (int r = 0; r < length; ++r) p.tasks.tasks.push_back({TaskKind::kChainStep, r, role_name(r)});
    p.tasks.encoding = {GoalScheme::kOneHot, one_hot(length)};
    p.tasks.behavior_goals = p.tasks.learn_goals = range(length);
    p.env = grid_env(types, 4, 1024, true);
    p.agents = {"unicorn", "expert:" + std::to_string(length - 1), "glutton", "random"};
    p.total_env_frames = 3'000'000;
    p.eval_every_frames = 250'000;
    if (holdout) throw std::invalid_argument("holdout override only applies to transfer presets");
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
  }
  p.tasks.validate();
  p.env.validate();
  return p;
}

TaskSet build_task_set(std::string_view name, const std::optional<std::vector<int>>& holdout) {
  return make_preset(name, holdout).tasks;
}

std::vector<AgentSpec> expand_agents(const ExperimentPreset& preset) {
  std::vector<AgentSpec> out;
  for (const auto& label : preset.agents) {
    if (label == "experts") {
      for (int g : preset.tasks.behavior_goals) out.push_back({AgentKind::kExpert, g});
    } else {
      out.push_back(AgentSpec::parse(label, preset.tasks));
    }
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text, const std::optional<std::string>& preset_override) {
  json root;
  const bool blank = std::all_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  if (blank) {
    root = json::object();
  } else {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigKeyError(std::string("config: parse failure: ") + e.what());
    }
  }
  if (!root.is_object()) throw ConfigKeyError("config: top level must be an object");

  std::set<std::string> seen;
  std::string preset_name = take<std::string>(root, "", "preset", "", seen);
  if (preset_override) preset_name = *preset_override;
  if (preset_name.empty()) throw ConfigKeyError("config: key 'preset' is required");

  ExperimentConfig cfg;
  const auto seed = take<std::uint64_t>(root, "", "seed", 1, seen);
  if (root.contains("holdout")) {
    seen.insert("holdout");
    checked("holdout", [&] { cfg.holdout = root.at("holdout").get<std::vector<int>>(); });
  } else {
    seen.insert("holdout");
  }
  checked("preset", [&] { cfg.preset = make_preset(preset_name, cfg.holdout); });
  if (root.contains("agents")) {
    checked("agents", [&] { cfg.preset.agents = root.at("agents").get<std::vector<std::string>>(); });
  }
  seen.insert("agents");

  // Environment overrides rebuild the world but keep the preset's objects.
  const json& env = section(root, "env");
  {
    std::set<std::string> s;
    EnvConfig& e = cfg.preset.env;
    e.width = take<int>(env, "env.", "width", e.width, s);
    e.height = take<int>(env, "env.", "height", e.height, s);
    e.episode_length = take<int>(env, "env.", "episode_length", e.episode_length, s);
    const int copies = take<int>(env, "env.", "copies_per_type", e.object_counts.front(), s);
    e.object_counts.assign(e.object_types.size(), copies);
    const auto mode = take<std::string>(env, "env.", "collect_mode", collect_name(e.collect_mode), s);
    if (mode == "always-collect") {
      e.collect_mode = CollectMode::kAlwaysCollect;
    } else if (mode == "conditional-pickup") {
      e.collect_mode = CollectMode::kConditionalPickup;
    } else {
      throw ConfigKeyError("config: key 'env.collect_mode' must be always-collect or conditional-pickup");
    }
    reject_unknown(env, "env.", s);
    checked("env", [&] { e.validate(); });
  }
  seen.insert("env");

  RunConfig& r = cfg.run;
  r.seed = seed;
  r.env = cfg.preset.env;
  r.tasks = cfg.preset.tasks;
  r.env.seed = seed;
  {
    const json& run = section(root, "run");
    std::set<std::string> s;
    r.num_actors = take<int>(run, "run.", "num_actors", 8, s);
    r.total_env_frames = take<std::uint64_t>(run, "run.", "total_env_frames", cfg.preset.total_env_frames, s);
    r.queue_capacity = take<int>(run, "run.", "queue_capacity", -1, s);
    r.eval_every_frames = take<std::uint64_t>(run, "run.", "eval_every_frames", cfg.preset.eval_every_frames, s);
    r.eval_episodes_per_goal = take<int>(run, "run.", "eval_episodes_per_goal", 5, s);
    const auto schedule = take<std::string>(run, "run.", "schedule", "threaded", s);
    if (schedule == "threaded") {
      r.schedule = Schedule::kThreaded;
    } else if (schedule == "lockstep") {
      r.schedule = Schedule::kLockstep;
    } else {
      throw ConfigKeyError("config: key 'run.schedule' must be threaded or lockstep");
    }
    reject_unknown(run, "run.", s);
  }
  seen.insert("run");
  {
    const json& l = section(root, "learner");
    std::set<std::string> s;
    r.learner.discount = take<double>(l, "learner.", "discount", 0.95, s);
    r.learner.unroll = take<int>(l, "learner.", "unroll", 20, s);
    r.learner.batch_size = take<int>(l, "learner.", "batch_size", 32, s);
    reject_unknown(l, "learner.", s);
  }
  seen.insert("learner");
  if (r.queue_capacity < 0) r.queue_capacity = 4 * r.learner.batch_size;
  {
    const json& o = section(root, "optimizer");
    std::set<std::string> s;
    r.optimizer.learning_rate = take<double>(o, "optimizer.", "learning_rate", 2e-4, s);
    r.optimizer.decay = take<double>(o, "optimizer.", "decay", 0.99, s);
    r.optimizer.epsilon = take<double>(o, "optimizer.", "epsilon", 0.01, s);
    reject_unknown(o, "optimizer.", s);
    if (!(r.optimizer.learning_rate > 0.0)) throw ConfigKeyError("config: key 'optimizer.learning_rate' must be positive");
    if (!(r.optimizer.decay >= 0.0 && r.optimizer.decay < 1.0)) throw ConfigKeyError("config: key 'optimizer.decay' must lie in [0, 1)");
    if (!(r.optimizer.epsilon > 0.0)) throw ConfigKeyError("config: key 'optimizer.epsilon' must be positive");
  }
  seen.insert("optimizer");
  {
    const json& n = section(root, "network");
    std::set<std::string> s;
    r.repr_dim = take<int>(n, "network.", "repr_dim", 128, s);
    r.hidden_dim = take<int>(n, "network.", "hidden_dim", 256, s);
    reject_unknown(n, "network.", s);
    if (r.repr_dim <= 0) throw ConfigKeyError("config: key 'network.repr_dim' must be positive");
    if (r.hidden_dim <= 0) throw ConfigKeyError("config: key 'network.hidden_dim' must be positive");
  }
  seen.insert("network");
  {
    const json& a = section(root, "actor");
    std::set<std::string> s;
    r.actor.epsilon_start = take<double>(a, "actor.", "epsilon_start", 1.0, s);
    r.actor.epsilon_end = take<double>(a, "actor.", "epsilon_end", 0.01, s);
    r.actor.epsilon_anneal_frames = take<std::uint64_t>(a, "actor.", "epsilon_anneal_frames", 1'000'000, s);
    reject_unknown(a, "actor.", s);
    checked("actor", [&] { r.actor.validate(); });
  }
  seen.insert("actor");
  reject_unknown(root, "", seen);

  if (r.num_actors < 1) throw ConfigKeyError("config: key 'run.num_actors' must be >= 1");
  if (r.queue_capacity < r.learner.batch_size) {
    throw ConfigKeyError("config: key 'run.queue_capacity' must be >= learner.batch_size");
  }
  if (!(r.learner.discount >= 0.0 && r.learner.discount < 1.0)) {
    throw ConfigKeyError("config: key 'learner.discount' must lie in [0, 1)");
  }
  if (r.learner.unroll < 1) throw ConfigKeyError("config: key 'learner.unroll' must be >= 1");
  if (r.learner.batch_size < 1) throw ConfigKeyError("config: key 'learner.batch_size' must be >= 1");
  if (r.eval_episodes_per_goal < 1) throw ConfigKeyError("config: key 'run.eval_episodes_per_goal' must be >= 1");
  checked("agents", [&] { (void)expand_agents(cfg.preset); });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override) {
  std::ifstream in(path);
  if (!in) throw ConfigKeyError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), preset_override);
}

std::string serialize_config(const ExperimentConfig& c) {
  const RunConfig& r = c.run;
  json root;
  root["preset"] = c.preset.name;
  root["seed"] = r.seed;
  root["agents"] = c.preset.agents;
  if (c.holdout) root["holdout"] = *c.holdout;
  root["env"] = {{"width", c.preset.env.width},
                 {"height", c.preset.env.height},
                 {"episode_length", c.preset.env.episode_length},
                 {"copies_per_type", c.preset.env.object_counts.front()},
                 {"collect_mode", collect_name(c.preset.env.collect_mode)}};
  root["run"] = {{"num_actors", r.num_actors},
                 {"total_env_frames", r.total_env_frames},
                 {"queue_capacity", r.queue_capacity},
                 {"eval_every_frames", r.eval_every_frames},
                 {"eval_episodes_per_goal", r.eval_episodes_per_goal},
                 {"schedule", schedule_name(r.schedule)}};
  root["learner"] = {{"discount", r.learner.discount}, {"unroll", r.learner.unroll}, {"batch_size", r.learner.batch_size}};
  root["optimizer"] = {{"learning_rate", r.optimizer.learning_rate},
                       {"decay", r.optimizer.decay},
                       {"epsilon", r.optimizer.epsilon}};
  root["network"] = {{"repr_dim", r.repr_dim}, {"hidden_dim", r.hidden_dim}};
  root["actor"] = {{"epsilon_start", r.actor.epsilon_start},
                   {"epsilon_end", r.actor.epsilon_end},
                   {"epsilon_anneal_frames", r.actor.epsilon_anneal_frames}};
  return root.dump(2);
}

std::string summarize(const ExperimentConfig& config, const std::vector<AgentOutcome>& agents) {
  std::ostringstream out;
  const TaskSet& base = config.preset.tasks;
  out << "preset: " << config.preset.name << "\nseed: " << config.run.seed << "\n";
  for (const auto& note : config.preset.notes) out << "note: " << note << "\n";

  out << "\n== final per-goal decomposition (mean rewards per episode) ==\n";
  out << std::left << std::setw(22) << "agent" << std::setw(18) << "goal";
  for (const auto& t : base.tasks) out << std::setw(14) << t.name;
  out << "\n";
  for (const auto& agent : agents) {
    for (const auto& run : agent.runs) {
      if (run.rows.empty()) continue;
      const std::uint64_t last = run.rows.back().frames;
      for (const auto& row : run.rows) {
        if (row.frames != last) continue;
        out << std::setw(22) << run.agent.label() << std::setw(18)
            << run.tasks.tasks[static_cast<std::size_t>(row.goal_id)].name;
        for (std::size_t k = 0; k < base.tasks.size(); ++k) {
          std::ostringstream cell;
          cell << std::fixed << std::setprecision(2) << row.decomposition[k];
          out << std::setw(14) << cell.str();
        }
        out << "\n";
      }
    }
  }

  out << "\n== learning curves (mean own-task reward; training goals vs hold-out goals) ==\n";
  out << "agent,frames,train_mean,holdout_mean\n";
  for (const auto& agent : agents) {
    std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>> curve;
    for (const auto& run : agent.runs) {
      const auto& held = run.tasks.holdout_goals;
      for (const auto& row : run.rows) {
        auto& slot = curve[row.frames];
        const bool is_held = std::find(held.begin(), held.end(), row.goal_id) != held.end();
        (is_held ? slot.second : slot.first).push_back(row.mean_reward);
      }
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? std::string("") : format_number(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    };
    for (const auto& [frames, vals] : curve) {
      out << agent.label << ',' << frames << ',' << mean(vals.first) << ',' << mean(vals.second) << "\n";
    }
  }
  for (const auto& agent : agents) {
    for (const auto& run : agent.runs) {
      if (run.failed) out << "\nFAILED " << run.agent.label() << ": " << run.failure << "\n";
    }
  }
  return out.str();
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_root,
                                 std::ostream& log) {
  ExperimentOutcome outcome;
  outcome.run_dir = out_root / (config.preset.name + "_s" + std::to_string(config.run.seed) + "_" + timestamp());
  std::filesystem::create_directories(outcome.run_dir);
  {
    std::ofstream cfg(outcome.run_dir / "config.json");
    cfg << serialize_config(config) << "\n";
  }

  const std::vector<AgentSpec> specs = expand_agents(config.preset);
  const auto expert_count = static_cast<std::uint64_t>(
      std::count_if(specs.begin(), specs.end(), [](const AgentSpec& a) { return a.kind == AgentKind::kExpert; }));
  const bool expert_family = std::find(config.preset.agents.begin(), config.preset.agents.end(), "experts") !=
                             config.preset.agents.end();

  std::map<std::string, std::size_t> index;
  for (const AgentSpec& spec : specs) {
    const std::string label = (expert_family && spec.kind == AgentKind::kExpert) ? "experts" : spec.label();
    if (!index.count(label)) {
      index[label] = outcome.agents.size();
      outcome.agents.push_back({label, {}});
    }
  }

  std::map<std::string, std::unique_ptr<std::ofstream>> files;
  for (const AgentSpec& spec : specs) {
    const bool family = expert_family && spec.kind == AgentKind::kExpert;
    const std::string label = family ? "experts" : spec.label();
    const auto dir = outcome.run_dir / agent_dir_name(label);
    std::filesystem::create_directories(dir / "checkpoints");

    RunConfig rc = config.run;
    rc.agent = spec;
    rc.experience_multiplier = family ? expert_count : 1;
    rc.checkpoint_dir.reset();

    auto& file = files[label];
    const TaskSet effective = make_baseline(rc.tasks, spec);
    if (!file) {
      file = std::make_unique<std::ofstream>(dir / "metrics.csv");
      *file << csv_header(effective) << '\n';
    }
    std::ofstream& csv = *file;
    MetricsSink sink([&csv](const MetricsRow& row) { csv << csv_line(row) << '\n' << std::flush; });

    log << "running " << spec.label() << " for " << rc.total_env_frames << " frames\n" << std::flush;
    RunResult res = run(rc, &sink);
    sink.close();

    const std::string ckpt_name = family ? "expert-" + std::to_string(spec.task) : "final";
    save_checkpoint(dir / "checkpoints" / (ckpt_name + ".ckpt"), res.final_params);
    {
      json meta{{"agent", spec.label()}, {"preset", config.preset.name}};
      if (config.holdout) meta["holdout"] = *config.holdout;
      std::ofstream side(dir / "checkpoints" / (ckpt_name + ".json"));
      side << meta.dump(2) << "\n";
    }
    if (res.failed) {
      outcome.failed = true;
      log << "  FAILED: " << res.failure << "\n";
    } else if (!res.rows.empty()) {
      const auto& last = res.rows.back();
      log << "  done in " << format_number(res.stats.wall_seconds) << "s, last eval goal " << last.goal_id
          << " reward " << format_number(last.mean_reward) << "\n";
    }
    outcome.agents[index[label]].runs.push_back(std::move(res));
  }

  std::ofstream summary(outcome.run_dir / "summary.txt");
  summary << summarize(config, outcome.agents);
  return outcome;
}

}  // namespace unicorn
