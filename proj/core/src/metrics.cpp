#include "unicorn/metrics.hpp"

#include <array>
#include <charconv>
#include <ostream>
#include <sstream>

namespace unicorn {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return {buf.data(), end};
}

std::string csv_header(const TaskSet& tasks) {
  std::ostringstream out;
  out << "frames,goal_id,mean_reward";
  for (const TaskSpec& t : tasks.tasks) out << ",count_" << t.name;
  out << ",loss,truncation_rate,wall_seconds";
  return out.str();
}

std::string csv_line(const MetricsRow& row) {
  std::ostringstream out;
  out << row.frames << ',' << row.goal_id << ',' << format_number(row.mean_reward);
  for (double c : row.decomposition) out << ',' << format_number(c);
  out << ',' << format_number(row.loss) << ',' << format_number(row.truncation_rate) << ','
      << format_number(row.wall_seconds);
  return out.str();
}

void write_csv(std::ostream& out, const TaskSet& tasks, const std::vector<MetricsRow>& rows) {
  out << csv_header(tasks) << '\n';
  for (const auto& row : rows) out << csv_line(row) << '\n';
}

MetricsSink::MetricsSink(Callback sink, std::size_t capacity) : channel_(capacity) {
  worker_ = std::thread([this, sink = std::move(sink)] {
    while (auto row = channel_.pop()) sink(*row);
  });
}

MetricsSink::~MetricsSink() { close(); }

void MetricsSink::submit(MetricsRow row) { channel_.push(std::move(row)); }

void MetricsSink::close() {
  channel_.close();
  if (worker_.joinable()) worker_.join();
}

MetricsSink::Callback csv_sink(std::ostream& out, const TaskSet& tasks) {
  out << csv_header(tasks) << '\n';
  return [&out](const MetricsRow& row) { out << csv_line(row) << '\n' << std::flush; };
}

}  // namespace unicorn
