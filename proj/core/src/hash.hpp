#pragma once

#include <cstdint>
#include <string_view>

namespace valueprobe::detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, chained: feed pieces one after another.
class Fnv1a {
 public:
  explicit Fnv1a(std::uint64_t seed = 0) { mix_u64(seed); }

  Fnv1a& mix(std::string_view s) {
    for (unsigned char c : s) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    // length terminator keeps ("ab","c") distinct from ("a","bc")
    return mix_u64(s.size());
  }

  Fnv1a& mix_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffU;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  std::uint64_t digest() const { return splitmix64(state_); }

  /// Uniform double in [0, 1).
  double unit() const { return static_cast<double>(digest() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace valueprobe::detail
