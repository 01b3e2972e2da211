#pragma once

#include <filesystem>
#include <iosfwd>

#include "unicorn/uvfa.hpp"

namespace unicorn {

/// Binary parameter dump: magic "UNICKPT", format version, NetDims, then
/// every tensor as little-endian IEEE-754 doubles in NetParams order.
/// Loading reproduces the parameters bit for bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const NetParams& params);
NetParams read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const NetParams& params);
NetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace unicorn
