#include "unicorn/tasks.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace unicorn {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kSingleObject: return "single-object";
    case TaskKind::kAbstractColor: return "abstract-color";
    case TaskKind::kAbstractShape: return "abstract-shape";
    case TaskKind::kChainStep: return "chain-step";
    case TaskKind::kGluttonSum: return "glutton-sum";
  }
  return "unknown";
}

std::string to_string(GoalScheme scheme) {
  switch (scheme) {
    case GoalScheme::kOneHot: return "one-hot";
    case GoalScheme::kTwoHot: return "two-hot";
    case GoalScheme::kAugmented: return "augmented";
    case GoalScheme::kConstant: return "constant";
  }
  return "unknown";
}

bool TaskSet::has_chain_tasks() const {
  return std::any_of(tasks.begin(), tasks.end(),
                     [](const TaskSpec& t) { return t.kind == TaskKind::kChainStep; });
}

std::vector<int> TaskSet::evaluation_goals() const {
  std::set<int> goals(behavior_goals.begin(), behavior_goals.end());
  goals.insert(learn_goals.begin(), learn_goals.end());
  goals.insert(holdout_goals.begin(), holdout_goals.end());
  return {goals.begin(), goals.end()};
}

void TaskSet::validate() const {
  const int k = num_tasks();
  if (k == 0) throw std::invalid_argument("task set: no tasks");
  for (std::size_t i = 0; i < object_types.size(); ++i) {
    if (object_types[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("task set: object type ids must be dense and ordered");
    }
  }
  if (encoding.num_goals() != k) {
    throw std::invalid_argument("task set: goal matrix must have one row per task");
  }
  if (encoding.dim() <= 0) throw std::invalid_argument("task set: goal dimension must be positive");
  auto check_indices = [k](const std::vector<int>& v, const char* what) {
    for (int g : v) {
      if (g < 0 || g >= k) {
        throw std::invalid_argument(std::string("task set: ") + what + " index out of range");
      }
    }
  };
  check_indices(behavior_goals, "behavior goal");
  check_indices(learn_goals, "learnable goal");
  check_indices(holdout_goals, "hold-out goal");
  if (behavior_goals.empty()) throw std::invalid_argument("task set: no behavior goals");

  bool chain = false;
  bool abstract = false;
  for (const TaskSpec& t : tasks) {
    switch (t.kind) {
      case TaskKind::kSingleObject:
        if (t.target < 0 || t.target >= static_cast<int>(object_types.size())) {
          throw std::invalid_argument("task set: single-object target out of range");
        }
        break;
      case TaskKind::kAbstractColor:
      case TaskKind::kAbstractShape:
        abstract = true;
        break;
      case TaskKind::kChainStep: {
        chain = true;
        int chain_length = 0;
        for (const ObjectType& o : object_types) {
          if (o.role) chain_length = std::max(chain_length, *o.role + 1);
        }
        if (t.target < 0 || t.target >= chain_length) {
          throw std::invalid_argument("task set: chain-step position beyond chain length");
        }
        break;
      }
      case TaskKind::kGluttonSum:
        break;
    }
  }
  if (chain && abstract) {
    throw std::invalid_argument("task set: abstract tasks are not allowed alongside chain tasks");
  }
}

bool chain_prefix_holds(std::span<const int> inventory_before, int role,
                        std::span<const ObjectType> types) {
  if (role < 0) return false;
  if (static_cast<int>(inventory_before.size()) < role) return false;
  for (int j = 0; j < role; ++j) {
    const auto& prior = types[static_cast<std::size_t>(inventory_before[static_cast<std::size_t>(j)])];
    if (!prior.role || *prior.role != role - 1 - j) return false;
  }
  return true;
}

std::vector<double> pseudo_rewards(std::span<const int> inventory_before, int collected,
                                   const TaskSet& tasks) {
  const auto& types = tasks.object_types;
  if (collected < 0 || collected >= static_cast<int>(types.size())) {
    throw std::out_of_range("pseudo_rewards: collected object id out of range");
  }
  const ObjectType& obj = types[static_cast<std::size_t>(collected)];
  std::vector<double> r(tasks.tasks.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < tasks.tasks.size(); ++i) {
    const TaskSpec& t = tasks.tasks[i];
    bool hit = false;
    switch (t.kind) {
      case TaskKind::kSingleObject: hit = collected == t.target; break;
      case TaskKind::kAbstractColor: hit = obj.color && *obj.color == t.target; break;
      case TaskKind::kAbstractShape: hit = obj.shape && *obj.shape == t.target; break;
      case TaskKind::kChainStep:
        hit = obj.role && *obj.role == t.target &&
              chain_prefix_holds(inventory_before, t.target, types);
        break;
      case TaskKind::kGluttonSum: break;
    }
    if (hit) {
      r[i] = 1.0;
      total += 1.0;
    }
  }
  for (std::size_t i = 0; i < tasks.tasks.size(); ++i) {
    if (tasks.tasks[i].kind == TaskKind::kGluttonSum) r[i] = total;
  }
  return r;
}

}  // namespace unicorn
