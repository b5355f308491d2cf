#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mcl {

// Every source of randomness in the project derives from one run seed
// through a named sub-stream (e.g. "data/centers", "aug/e3/b7"). Streams
// with different names are statistically independent; the same (seed, name)
// pair always yields the same engine state.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view stream);

std::mt19937_64 substream(std::uint64_t seed, std::string_view stream);

}  // namespace mcl
