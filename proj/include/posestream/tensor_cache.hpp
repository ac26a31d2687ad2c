#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "posestream/io_util.hpp"
#include "posestream/tensorize.hpp"

namespace posestream {

/// Binary tensor cache, little-endian:
///
///   char[8]  magic "PSTENSOR"
///   u32      version (1)
///   u32      K (rows)
///   u32      width (2L)
///   u32+byte topology id
///   u64      config hash
///   u64      seed
///   u32      record count
///   per record:
///     u32+byte video id
///     i32      label (-1 when absent)
///     u32      source frame count
///     u8       sampling mode (0 random, 1 center)
///     u64      sampling seed
///     u32[K]   chosen frames
///     f32[K*width*3] payload, row-major over (row, column, channel)
struct TensorCache {
  Eigen::Index rows = 0;
  Eigen::Index width = 0;
  std::string topology;
  Provenance provenance;
  std::vector<PoseTensor> tensors;
};

inline constexpr std::uint32_t kTensorCacheVersion = 1;

void write_tensor_cache(std::ostream& out, const TensorCache& cache);
void write_tensor_cache(const std::filesystem::path& path, const TensorCache& cache);
TensorCache read_tensor_cache(std::istream& in);
TensorCache read_tensor_cache(const std::filesystem::path& path);

}  // namespace posestream
