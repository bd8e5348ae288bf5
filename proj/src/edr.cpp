#include "panelcast/edr.hpp"

#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace panelcast {

FeatureRanking FeatureRanking::top(std::size_t k) const {
    FeatureRanking out;
    out.entries.assign(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(std::min(k, entries.size())));
    return out;
}

std::vector<std::string> FeatureRanking::codes() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.indicator_code);
    return out;
}

std::size_t edr_distance(std::span<const double> a, std::span<const double> b, double epsilon) {
    if (!(epsilon > 0.0)) throw ParameterError(fmt::format("EDR epsilon must be > 0, got {}", epsilon));

    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t subcost = std::fabs(a[i - 1] - b[j - 1]) <= epsilon ? 0 : 1;
            cur[j] = std::min({prev[j - 1] + subcost, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

FeatureRanking rank_all(std::span<const double> target, const std::map<std::string, std::vector<double>>& candidates,
                        const EdrParams& params) {
    FeatureRanking ranking;
    ranking.entries.reserve(candidates.size());
    for (const auto& [code, series] : candidates) {
        if (series.size() != target.size())
            throw DataError(fmt::format("candidate {} has length {}, target has {}", code, series.size(), target.size()));
        ranking.entries.push_back({code, edr_distance(target, series, params.epsilon), 0});
    }
    std::sort(ranking.entries.begin(), ranking.entries.end(), [](const RankedFeature& l, const RankedFeature& r) {
        return l.distance != r.distance ? l.distance < r.distance : l.indicator_code < r.indicator_code;
    });
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) ranking.entries[i].rank = i + 1;
    return ranking;
}

FeatureRanking rank_features(std::span<const double> target,
                             const std::map<std::string, std::vector<double>>& candidates, const EdrParams& params,
                             std::size_t k) {
    if (k == 0) throw ParameterError("k must be positive");
    if (k > candidates.size())
        throw DataError(fmt::format("k = {} exceeds the {} eligible candidates", k, candidates.size()));
    return rank_all(target, candidates, params).top(k);
}

} // namespace panelcast
