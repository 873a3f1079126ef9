#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ppfa {

/// Mixes several integers into one 64-bit seed, for per-task substreams.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts)
{
  std::vector<std::uint32_t> words;
  words.reserve(parts.size() * 2);
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

} // namespace ppfa
