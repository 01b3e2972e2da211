#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include "unicorn/queue.hpp"
#include "unicorn/tasks.hpp"

namespace unicorn {

/// One evaluation point for one goal.
struct MetricsRow {
  /// Experience consumed, already scaled by the run's experience multiplier.
  std::uint64_t frames = 0;
  int goal_id = 0;
  /// Mean reward of the evaluated goal's own task.
  double mean_reward = 0.0;
  /// Mean per-episode reward count of every task while pursuing `goal_id`.
  std::vector<double> decomposition;
  double loss = 0.0;
  double truncation_rate = 0.0;
  double wall_seconds = 0.0;
  int episodes = 0;
};

/// Shortest round-trip decimal representation.
std::string format_number(double value);

std::string csv_header(const TaskSet& tasks);
std::string csv_line(const MetricsRow& row);
void write_csv(std::ostream& out, const TaskSet& tasks, const std::vector<MetricsRow>& rows);

/// Dedicated writer thread fed through a channel. Rows are delivered to
/// `sink` in submission order; close() flushes and joins.
class MetricsSink {
 public:
  using Callback = std::function<void(const MetricsRow&)>;

  explicit MetricsSink(Callback sink, std::size_t capacity = 1024);
  ~MetricsSink();

  MetricsSink(const MetricsSink&) = delete;
  MetricsSink& operator=(const MetricsSink&) = delete;

  void submit(MetricsRow row);
  void close();

 private:
  BoundedQueue<MetricsRow> channel_;
  std::thread worker_;
};

/// MetricsSink callback appending CSV lines to `out` (header written first).
MetricsSink::Callback csv_sink(std::ostream& out, const TaskSet& tasks);

}  // namespace unicorn
