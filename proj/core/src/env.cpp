#include "unicorn/env.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace unicorn {
namespace {

std::vector<Cell> free_cells(const WorldState& s, bool exclude_agent) {
  std::vector<char> taken(static_cast<std::size_t>(s.width * s.height), 0);
  for (const auto& o : s.objects) {
    if (o.pos.x >= 0) taken[static_cast<std::size_t>(o.pos.y * s.width + o.pos.x)] = 1;
  }
  if (exclude_agent) taken[static_cast<std::size_t>(s.agent.y * s.width + s.agent.x)] = 1;
  std::vector<Cell> cells;
  cells.reserve(taken.size());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      if (!taken[static_cast<std::size_t>(y * s.width + x)]) cells.push_back({x, y});
    }
  }
  return cells;
}

Cell sample_cell(const std::vector<Cell>& cells, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  return cells[pick(rng)];
}

}  // namespace

int EnvConfig::total_objects() const {
  return std::accumulate(object_counts.begin(), object_counts.end(), 0);
}

void EnvConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("env: grid dimensions must be positive");
  if (episode_length <= 0) throw ConfigError("env: episode_length must be positive");
  if (object_types.empty()) throw ConfigError("env: no object types declared");
  if (object_counts.size() != object_types.size()) {
    throw ConfigError("env: object_counts must list one count per object type");
  }
  for (std::size_t i = 0; i < object_types.size(); ++i) {
    if (object_types[i].id != static_cast<int>(i)) {
      throw ConfigError("env: object type ids must be dense and ordered");
    }
    if (object_counts[i] <= 0) {
      throw ConfigError("env: object count for type " + std::to_string(i) + " must be positive");
    }
    const bool has_visual = object_types[i].color.has_value() && object_types[i].shape.has_value();
    const bool has_role = object_types[i].role.has_value();
    if (chain_mode ? !has_role : !has_visual) {
      throw ConfigError("env: object type " + std::to_string(i) +
                        (chain_mode ? " needs a chain role" : " needs a color and shape"));
    }
  }
  // Agent plus every object must fit on distinct cells, with one cell
  // spare so a collected object always has somewhere to respawn.
  if (total_objects() + 1 >= width * height) {
    throw ConfigError("env: grid " + std::to_string(width) + "x" + std::to_string(height) +
                      " too small for " + std::to_string(total_objects()) + " objects and the agent");
  }
}

int observation_size(const EnvConfig& config) {
  const int t = config.num_types();
  return config.width * config.height * (t + 1) + kInventoryCapacity * t + kNumActions + 1;
}

int observation_size(const WorldState& state) {
  const int t = state.num_types;
  return state.width * state.height * (t + 1) + kInventoryCapacity * t + kNumActions + 1;
}

WorldState reset(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  WorldState s;
  s.width = config.width;
  s.height = config.height;
  s.episode_length = config.episode_length;
  s.num_types = config.num_types();
  s.collect_mode = config.collect_mode;
  s.rng.seed(seed);

  std::vector<Cell> cells = free_cells(s, false);
  s.agent = sample_cell(cells, s.rng);
  s.objects.reserve(static_cast<std::size_t>(config.total_objects()));
  for (int type = 0; type < config.num_types(); ++type) {
    for (int c = 0; c < config.object_counts[static_cast<std::size_t>(type)]; ++c) {
      s.objects.push_back({type, sample_cell(free_cells(s, true), s.rng)});
    }
  }
  return s;
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw std::invalid_argument("action index " + std::to_string(index) + " out of range");
  }
  return static_cast<Action>(index);
}

StepResult step(WorldState& state, Action action, const TaskSet& tasks, int feedback_task) {
  const int a = static_cast<int>(action);
  if (a < 0 || a >= kNumActions) throw std::invalid_argument("step: invalid action");
  if (state.terminal()) throw std::logic_error("step: episode already terminated");

  Cell next = state.agent;
  switch (action) {
    case Action::kUp: next.y -= 1; break;
    case Action::kDown: next.y += 1; break;
    case Action::kLeft: next.x -= 1; break;
    case Action::kRight: next.x += 1; break;
  }
  if (next.x >= 0 && next.x < state.width && next.y >= 0 && next.y < state.height) {
    state.agent = next;
  }

  StepResult result;
  result.rewards.assign(tasks.tasks.size(), 0.0);

  auto hit = std::find_if(state.objects.begin(), state.objects.end(),
                          [&](const PlacedObject& o) { return o.pos == state.agent; });
  if (hit != state.objects.end()) {
    const int type = hit->type;
    bool permitted = true;
    const ObjectType& kind = tasks.object_types.at(static_cast<std::size_t>(type));
    if (state.collect_mode == CollectMode::kConditionalPickup && kind.role) {
      permitted = chain_prefix_holds(state.inventory, *kind.role, tasks.object_types);
    }
    if (permitted) {
      result.rewards = pseudo_rewards(state.inventory, type, tasks);
      result.collected = type;
      state.inventory.insert(state.inventory.begin(), type);
      if (state.inventory.size() > static_cast<std::size_t>(kInventoryCapacity)) {
        state.inventory.pop_back();
      }
      // Park the collected object off-grid so it does not block its own
      // respawn cell, then place it uniformly among the free cells.
      hit->pos = {-1, -1};
      hit->pos = sample_cell(free_cells(state, true), state.rng);
    }
  }

  state.step_count += 1;
  state.prev_action = a;
  double echo = 0.0;
  if (feedback_task >= 0) echo = result.rewards.at(static_cast<std::size_t>(feedback_task));
  state.prev_reward = std::clamp(echo, -1.0, 1.0);
  result.terminal = state.step_count == state.episode_length;
  return result;
}

void observe_into(const WorldState& state, Eigen::Ref<Eigen::VectorXd> out) {
  const int t = state.num_types;
  const int cells = state.width * state.height;
  if (out.size() != observation_size(state)) {
    throw std::invalid_argument("observe: output buffer has the wrong length");
  }
  out.setZero();
  for (const auto& o : state.objects) {
    if (o.pos.x < 0) continue;
    out[(o.pos.y * state.width + o.pos.x) * t + o.type] = 1.0;
  }
  const int agent_base = cells * t;
  out[agent_base + state.agent.y * state.width + state.agent.x] = 1.0;
  const int inv_base = cells * (t + 1);
  for (std::size_t slot = 0; slot < state.inventory.size(); ++slot) {
    out[inv_base + static_cast<int>(slot) * t + state.inventory[slot]] = 1.0;
  }
  const int action_base = inv_base + kInventoryCapacity * t;
  if (state.prev_action >= 0) out[action_base + state.prev_action] = 1.0;
  out[action_base + kNumActions] = state.prev_reward;
}

Eigen::VectorXd observe(const WorldState& state) {
  Eigen::VectorXd out(observation_size(state));
  observe_into(state, out);
  return out;
}

}  // namespace unicorn
