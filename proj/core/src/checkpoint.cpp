#include "unicorn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace unicorn {
namespace {

constexpr std::array<char, 8> kMagic{'U', 'N', 'I', 'C', 'K', 'P', 'T', '\0'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const NetParams& params) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  const NetDims& d = params.dims;
  for (int v : {d.obs_dim, d.repr_dim, d.goal_dim, d.hidden_dim, d.num_actions, d.num_goals}) {
    put<std::int64_t>(out, v);
  }
  params.for_each_tensor([&out](const auto& t) {
    put<std::int64_t>(out, t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) put<double>(out, t(i));
  });
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

NetParams read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  NetDims d;
  d.obs_dim = static_cast<int>(get<std::int64_t>(in));
  d.repr_dim = static_cast<int>(get<std::int64_t>(in));
  d.goal_dim = static_cast<int>(get<std::int64_t>(in));
  d.hidden_dim = static_cast<int>(get<std::int64_t>(in));
  d.num_actions = static_cast<int>(get<std::int64_t>(in));
  d.num_goals = static_cast<int>(get<std::int64_t>(in));
  NetParams p = NetParams::zeros(d);
  p.for_each_tensor([&in](auto t) {
    const auto n = get<std::int64_t>(in);
    if (n != t.size()) throw std::runtime_error("checkpoint: tensor size mismatch");
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = get<double>(in);
  });
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const NetParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
  write_checkpoint(out, params);
}

NetParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace unicorn
