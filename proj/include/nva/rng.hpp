#pragma once

#include "nva/linalg.hpp"

#include <cstdint>
#include <random>

namespace nva {

using Engine = std::mt19937_64;

// Independent stream keyed by (root seed, replicate, lane, counter). Lanes index mixture
// components or particles; the counter is the iteration (0 for initialization).
Engine substream(std::uint64_t root, std::uint64_t replicate, std::uint64_t lane,
                 std::uint64_t counter);

// Column-by-column standard normal draws.
Matrix standard_normal(Engine& engine, Eigen::Index rows, Eigen::Index cols);

}  // namespace nva
