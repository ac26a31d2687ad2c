#pragma once

#include <filesystem>
#include <iosfwd>

#include "posestream/convnet.hpp"
#include "posestream/io_util.hpp"

namespace posestream {

/// Model checkpoint, little-endian:
///
///   char[8] magic "PSCONVNT", u32 version (1)
///   u32 x 8 rows, cols, classes, conv1, conv2, pool_window, pool_stride, hidden
///   u64 config hash, u64 seed
///   u32 blob count, then per blob:
///     u32+bytes name, u32 ndims, u32[ndims] dims, f64[prod(dims)] row-major
struct Checkpoint {
  PoseConvNetd net;
  Provenance provenance;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace posestream
