#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace panelcast {

struct EdrParams {
    // Match tolerance, in units of the (z-normalized) series.
    double epsilon = 0.25;
};

struct RankedFeature {
    std::string indicator_code;
    std::size_t distance = 0;
    std::size_t rank = 0; // 1-based
};

// Ordered by (distance, indicator_code).
struct FeatureRanking {
    std::vector<RankedFeature> entries;

    FeatureRanking top(std::size_t k) const;
    std::vector<std::string> codes() const;
};

// Edit Distance on Real sequence. Two elements match when they differ by at
// most epsilon; insertion, deletion and a non-matching substitution each cost 1.
// Runs in O(|a| |b|) time with two rolling rows.
std::size_t edr_distance(std::span<const double> a, std::span<const double> b, double epsilon);

// Full ranking of every candidate against the target.
FeatureRanking rank_all(std::span<const double> target, const std::map<std::string, std::vector<double>>& candidates,
                        const EdrParams& params);

// rank_all truncated to the k closest candidates.
FeatureRanking rank_features(std::span<const double> target,
                             const std::map<std::string, std::vector<double>>& candidates, const EdrParams& params,
                             std::size_t k);

} // namespace panelcast
