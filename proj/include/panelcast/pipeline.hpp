#pragma once

#include "panelcast/config.hpp"
#include "panelcast/edr.hpp"
#include "panelcast/panel_data.hpp"

#include <filesystem>
#include <future>
#include <map>
#include <string>
#include <vector>

namespace panelcast {

struct Dataset {
    std::vector<IndicatorSeries> indicators;
    std::vector<IndicatorSeries> targets; // one per country, sorted by code
};

Dataset load_dataset(const PipelineConfig& config);

struct CountrySelection {
    std::string country;
    FeatureRanking ranking; // every eligible candidate
    std::map<std::string, std::string> indicator_names;
    CountryPanel panel;     // built from the top-k codes
};

// Ranks one country's eligible indicators against its target and builds the
// panel from the k closest. Eligible: coverage >= threshold in the year range.
// Both the target and the candidates are imputed and z-normalized before the
// distance is taken; the panel itself holds raw values.
CountrySelection select_features(const Dataset& data, const IndicatorSeries& target, const PipelineConfig& config);
std::vector<CountrySelection> select_all(const Dataset& data, const PipelineConfig& config);

// rank,indicator_code,indicator_name,edr_distance for the top k entries.
void write_ranking_csv(std::ostream& out, const CountrySelection& selection, std::size_t k);

// Runs fn over items on separate threads and returns results in input order.
// The first exception (in input order) is rethrown.
template <class T, class Fn>
auto parallel_map(const std::vector<T>& items, Fn fn) {
    using R = decltype(fn(items.front()));
    std::vector<std::future<R>> futures;
    futures.reserve(items.size());
    for (const auto& item : items) futures.push_back(std::async(std::launch::async, [&fn, &item] { return fn(item); }));
    std::vector<R> out;
    out.reserve(items.size());
    for (auto& f : futures) f.wait();
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

// Writes to a sibling temporary file, then renames over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace panelcast
