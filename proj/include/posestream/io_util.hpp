#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace posestream {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// 64-bit FNV-1a; stable across platforms, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

/// Provenance stamped into every output file.
struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

namespace binary {

template <typename T>
  requires std::is_arithmetic_v<T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
  requires std::is_arithmetic_v<T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("unexpected end of binary file");
  return value;
}

inline std::string get_string(std::istream& in, std::uint32_t max_len = 1u << 20) {
  const auto len = get<std::uint32_t>(in);
  if (len > max_len) throw std::runtime_error("corrupt binary file: string too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("unexpected end of binary file");
  return s;
}

}  // namespace binary

}  // namespace posestream
