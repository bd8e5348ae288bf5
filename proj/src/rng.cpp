#include "panelcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace panelcast {

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    // Largest multiple of bound that fits; reject draws above it.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
    std::uint64_t draw = rng();
    while (draw > limit) draw = rng();
    return draw % bound;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

std::vector<std::size_t> sample_indices(std::size_t n, double fraction, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (fraction >= 1.0 || n == 0) return idx;
    auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    take = std::clamp<std::size_t>(take, 1, n);
    // Partial shuffle: position i receives a uniform pick from the unpicked tail.
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace panelcast
