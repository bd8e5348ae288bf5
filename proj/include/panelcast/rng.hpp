#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace panelcast {

// All stochastic choices (row/column sampling, shuffled folds) draw from
// std::mt19937_64, whose output sequence is fixed by the C++ standard. Bounded
// integers use rejection sampling on the raw 64-bit output instead of
// std::uniform_int_distribution, whose algorithm is implementation-defined.
using Rng = std::mt19937_64;

// Uniform integer in [0, bound). bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// Fisher-Yates shuffle of 0..n-1, in place from the back.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

// floor(fraction * n) elements (minimum 1) of 0..n-1 chosen by a partial
// Fisher-Yates pass, returned in ascending order. fraction >= 1 returns all
// indices without consuming randomness.
std::vector<std::size_t> sample_indices(std::size_t n, double fraction, Rng& rng);

} // namespace panelcast
