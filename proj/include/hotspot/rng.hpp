#ifndef HOTSPOT_RNG_HPP
#define HOTSPOT_RNG_HPP

#include <cstdint>
#include <string_view>

namespace hotspot {

/// FNV-1a 64-bit hash; used for purpose labels and file digests.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Single documented derivation for every random stream in the project:
/// a command-level seed plus a purpose label plus an index yields an
/// independent substream seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a64(purpose)) + index);
}

}  // namespace hotspot

#endif  // HOTSPOT_RNG_HPP
