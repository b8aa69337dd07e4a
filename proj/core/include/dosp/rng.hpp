#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dosp {

using Rng = std::mt19937_64;

// Derives an independent generator for a named consumer ("topology",
// "walks", "features", ...) so that each consumer's draws depend only on the
// master seed and its own name.
Rng substream(std::uint64_t master_seed, std::string_view name);

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view name);

}  // namespace dosp
