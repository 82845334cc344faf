#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hessavg {

// All randomness flows through std::mt19937_64. Independent streams are keyed
// by (seed, index) and seeded through SplitMix64 so neighbouring seeds do not
// produce correlated engines.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

Rng make_stream(std::uint64_t seed, std::uint64_t index = 0);

// FNV-1a, used for stable run identifiers.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace hessavg
