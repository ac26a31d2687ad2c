#include "posestream/tensor_cache.hpp"

#include <array>
#include <fstream>

namespace posestream {

namespace {
constexpr std::array<char, 8> kMagic{'P', 'S', 'T', 'E', 'N', 'S', 'O', 'R'};
}

void write_tensor_cache(std::ostream& out, const TensorCache& cache) {
  using namespace binary;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kTensorCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.width));
  put_string(out, cache.topology);
  put<std::uint64_t>(out, cache.provenance.config_hash);
  put<std::uint64_t>(out, cache.provenance.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cache.tensors.size()));

  for (const auto& t : cache.tensors) {
    if (t.rows() != cache.rows || t.cols() != cache.width) {
      throw std::invalid_argument("tensor cache: tensor for " + t.video + " has shape " + std::to_string(t.rows()) +
                                  "x" + std::to_string(t.cols()) + ", cache expects " +
                                  std::to_string(cache.rows) + "x" + std::to_string(cache.width));
    }
    put_string(out, t.video);
    put<std::int32_t>(out, t.label ? *t.label : -1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.plan.num_frames));
    put<std::uint8_t>(out, t.plan.mode == SamplingMode::random ? 0 : 1);
    put<std::uint64_t>(out, t.plan.seed);
    for (Eigen::Index k = 0; k < cache.rows; ++k) {
      const bool has = static_cast<std::size_t>(k) < t.plan.frames.size();
      put<std::uint32_t>(out, has ? static_cast<std::uint32_t>(t.plan.frames[static_cast<std::size_t>(k)]) : 0);
    }
    for (Eigen::Index r = 0; r < cache.rows; ++r) {
      for (Eigen::Index c = 0; c < cache.width; ++c) {
        for (int ch = 0; ch < 3; ++ch) put<float>(out, static_cast<float>(t.channels[ch](r, c)));
      }
    }
  }
}

void write_tensor_cache(const std::filesystem::path& path, const TensorCache& cache) {
  write_file_atomic(path, [&](std::ostream& out) { write_tensor_cache(out, cache); });
}

TensorCache read_tensor_cache(std::istream& in) {
  using namespace binary;
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a pose tensor cache (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kTensorCacheVersion) {
    throw std::runtime_error("unsupported tensor cache version " + std::to_string(version));
  }
  TensorCache cache;
  cache.rows = get<std::uint32_t>(in);
  cache.width = get<std::uint32_t>(in);
  cache.topology = get_string(in);
  cache.provenance.config_hash = get<std::uint64_t>(in);
  cache.provenance.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint32_t>(in);
  cache.tensors.reserve(count);

  std::vector<float> payload(static_cast<std::size_t>(cache.rows * cache.width * 3));
  for (std::uint32_t i = 0; i < count; ++i) {
    PoseTensor t;
    t.video = get_string(in);
    const auto label = get<std::int32_t>(in);
    if (label >= 0) t.label = label;
    t.topology = cache.topology;
    t.plan.num_frames = get<std::uint32_t>(in);
    t.plan.mode = get<std::uint8_t>(in) == 0 ? SamplingMode::random : SamplingMode::center;
    t.plan.seed = get<std::uint64_t>(in);
    for (Eigen::Index k = 0; k < cache.rows; ++k) t.plan.frames.push_back(get<std::uint32_t>(in));

    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!in) throw std::runtime_error("tensor cache truncated in record " + std::to_string(i));
    for (auto& ch : t.channels) ch.resize(cache.rows, cache.width);
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < cache.rows; ++r) {
      for (Eigen::Index c = 0; c < cache.width; ++c) {
        for (int ch = 0; ch < 3; ++ch) t.channels[ch](r, c) = payload[idx++];
      }
    }
    cache.tensors.push_back(std::move(t));
  }
  return cache;
}

TensorCache read_tensor_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open tensor cache " + path.string());
  return read_tensor_cache(in);
}

}  // namespace posestream
