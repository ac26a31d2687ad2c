#include "posestream/checkpoint.hpp"

#include <array>
#include <fstream>

namespace posestream {

namespace {

constexpr std::array<char, 8> kMagic{'P', 'S', 'C', 'O', 'N', 'V', 'N', 'T'};

template <typename M>
void put_blob(std::ostream& out, const char* name, const M& m) {
  using namespace binary;
  put_string(out, name);
  const bool vector = M::ColsAtCompileTime == 1;
  put<std::uint32_t>(out, vector ? 1 : 2);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  if (!vector) put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  using namespace binary;
  const auto& s = checkpoint.net.shape();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  for (auto v : {s.rows, s.cols, s.classes, s.arch.conv1, s.arch.conv2, s.arch.pool_window, s.arch.pool_stride,
                 s.arch.hidden}) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  put<std::uint64_t>(out, checkpoint.provenance.config_hash);
  put<std::uint64_t>(out, checkpoint.provenance.seed);
  put<std::uint32_t>(out, 8);
  checkpoint.net.params().for_each([&](const char* name, const auto& m) { put_blob(out, name, m); });
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, checkpoint); });
}

Checkpoint read_checkpoint(std::istream& in) {
  using namespace binary;
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not a pose network checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  NetShape s;
  s.rows = get<std::uint32_t>(in);
  s.cols = get<std::uint32_t>(in);
  s.classes = get<std::uint32_t>(in);
  s.arch.conv1 = get<std::uint32_t>(in);
  s.arch.conv2 = get<std::uint32_t>(in);
  s.arch.pool_window = get<std::uint32_t>(in);
  s.arch.pool_stride = get<std::uint32_t>(in);
  s.arch.hidden = get<std::uint32_t>(in);
  s.validate();

  Checkpoint ck;
  ck.provenance.config_hash = get<std::uint64_t>(in);
  ck.provenance.seed = get<std::uint64_t>(in);
  const auto blobs = get<std::uint32_t>(in);
  if (blobs != 8) throw std::runtime_error("checkpoint: expected 8 parameter blobs, found " + std::to_string(blobs));

  auto params = NetParams<double>::zeros(s);
  params.for_each([&](const char* expected, auto& m) {
    const auto name = get_string(in);
    if (name != expected) throw std::runtime_error("checkpoint: expected blob " + std::string(expected) + ", found " + name);
    const auto ndims = get<std::uint32_t>(in);
    const Eigen::Index rows = ndims >= 1 ? get<std::uint32_t>(in) : 0;
    const Eigen::Index cols = ndims == 2 ? get<std::uint32_t>(in) : 1;
    if (ndims < 1 || ndims > 2 || rows != m.rows() || cols != m.cols()) {
      throw std::runtime_error("checkpoint: blob " + name + " has the wrong shape");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get<double>(in);
    }
  });
  ck.net = PoseConvNetd(s, std::move(params));
  return ck;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace posestream
