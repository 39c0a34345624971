#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rwn/trainer.hpp"

namespace rwn {

// Layout: magic "RWNCKPT1"; u32 LE k, m, f1, f2, seed, iter; then f64 LE
// theta[k], unary weights[m*k] row-major, unary biases[m].

inline constexpr char kCheckpointMagic[] = "RWNCKPT";
inline constexpr char kCheckpointVersion = '1';

std::vector<std::uint8_t> serialize_checkpoint(const ModelCheckpoint& model);

/// FormatError on bad magic, truncation or trailing bytes;
/// UnsupportedVersion when only the version digit differs.
ModelCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& model);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace rwn
