#pragma once

#include <cstdint>
#include <random>

namespace kron {

std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for work item `index` of a run seeded by `master`.
/// Depends only on (master, index), so results never depend on scheduling.
std::mt19937_64 substream(std::uint64_t master, std::uint64_t index);
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace kron
