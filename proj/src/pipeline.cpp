#include "panelcast/pipeline.hpp"

#include "panelcast/csv.hpp"
#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace panelcast {

Dataset load_dataset(const PipelineConfig& config) {
    Dataset data;
    data.indicators = load_wdi_csv(config.paths.indicators, config.year_range);
    data.targets = load_target_csv(config.paths.target);
    return data;
}

CountrySelection select_features(const Dataset& data, const IndicatorSeries& target, const PipelineConfig& config) {
    CountrySelection sel;
    sel.country = target.country;

    const auto target_filled = impute_series(reindex(target, config.year_range));
    const auto target_norm = znormalize(target_filled.values()).first;

    std::map<std::string, std::vector<double>> candidates;
    std::vector<IndicatorSeries> own;
    for (const auto& s : data.indicators) {
        if (s.country != target.country) continue;
        own.push_back(s);
        if (coverage(s, config.year_range) < config.coverage_threshold || s.observed_count() < 2) continue;
        const auto filled = impute_series(reindex(s, config.year_range));
        candidates.emplace(s.indicator_code, znormalize(filled.values()).first);
        sel.indicator_names.emplace(s.indicator_code, s.indicator_name);
    }
    if (config.edr.k > candidates.size())
        throw DataError(fmt::format("{}: k = {} exceeds the {} eligible indicators", target.country, config.edr.k,
                                    candidates.size()));

    sel.ranking = rank_all(target_norm, candidates, EdrParams{config.edr.epsilon});
    const auto codes = sel.ranking.top(config.edr.k).codes();
    sel.panel = build_panel(target, own, codes, config.year_range, config.coverage_threshold);
    return sel;
}

std::vector<CountrySelection> select_all(const Dataset& data, const PipelineConfig& config) {
    return parallel_map(data.targets, [&](const IndicatorSeries& t) { return select_features(data, t, config); });
}

void write_ranking_csv(std::ostream& out, const CountrySelection& selection, std::size_t k) {
    out << "rank,indicator_code,indicator_name,edr_distance\n";
    for (const auto& e : selection.ranking.top(k).entries) {
        const auto name = selection.indicator_names.at(e.indicator_code);
        out << e.rank << ',' << csv::escape(e.indicator_code) << ',' << csv::escape(name) << ',' << e.distance << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", tmp.string()));
        out << content;
        if (!out.flush()) throw std::runtime_error(fmt::format("{}: write failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("{}: cannot open file", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace panelcast
