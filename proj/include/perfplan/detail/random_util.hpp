#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace perfplan::detail {

// Uniform draw in [0, 1) from the top 53 bits of the generator. Used
// instead of std::uniform_real_distribution so that fitted results are
// bit-identical across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_uniform(rng);
}

// Fisher-Yates with generator-modulo indexing; same portability rationale
// as unit_uniform (std::shuffle is implementation-defined).
template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng() % i]);
}

} // namespace perfplan::detail
