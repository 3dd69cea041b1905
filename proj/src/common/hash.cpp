#include "edagger/common/hash.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace edagger {

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t state) {
  for (unsigned char b : bytes) {
    state ^= b;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t state) {
  return fnv1a64(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()), state);
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 1 << 16> buffer{};
  std::uint64_t state = kFnvOffset;
  while (in) {
    in.read(buffer.data(), buffer.size());
    state = fnv1a64(std::string_view(buffer.data(), static_cast<std::size_t>(in.gcount())), state);
  }
  return state;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace edagger
