#include "nva/rng.hpp"

#include <array>

namespace nva {

Engine substream(std::uint64_t root, std::uint64_t replicate, std::uint64_t lane,
                 std::uint64_t counter) {
    std::array<std::uint32_t, 8> words{};
    const std::array<std::uint64_t, 4> key{root, replicate, lane, counter};
    for (std::size_t i = 0; i < key.size(); ++i) {
        words[2 * i] = static_cast<std::uint32_t>(key[i]);
        words[2 * i + 1] = static_cast<std::uint32_t>(key[i] >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

Matrix standard_normal(Engine& engine, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) z(r, c) = normal(engine);
    return z;
}

}  // namespace nva
