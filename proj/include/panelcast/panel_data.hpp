#pragma once

#include "panelcast/matrix.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace panelcast {

struct YearRange {
    int first = 2008;
    int last = 2023;

    bool contains(int year) const { return year >= first && year <= last; }
    std::size_t size() const { return last >= first ? static_cast<std::size_t>(last - first + 1) : 0; }
};

// One (country, indicator) yearly series. Absent values are std::nullopt.
struct IndicatorSeries {
    std::string country;
    std::string indicator_code;
    std::string indicator_name;
    std::map<int, std::optional<double>> observations;

    std::size_t observed_count() const;
    // Values in year order; throws DataError if any entry is missing.
    std::vector<double> values() const;
};

struct NormStats {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

// Aligned target and feature rows for one country. Feature cells may be
// missing (NaN); the target never is.
struct CountryPanel {
    std::string country;
    std::vector<int> years;
    std::vector<double> target;
    FeatureMatrix features;
    std::vector<std::string> feature_codes;

    std::size_t rows() const { return years.size(); }
    // A panel without predictors is valid but cannot say much.
    bool has_no_features() const { return feature_codes.empty(); }

    CountryPanel select_rows(std::span<const std::size_t> rows) const;
};

inline constexpr double kDefaultCoverageThreshold = 0.7;

// Wide World-Development-Indicators layout:
// country,indicator_code,indicator_name,<year>,<year>,...
// Rows whose cells are all blank inside year_range are dropped.
std::vector<IndicatorSeries> load_wdi_csv(const std::filesystem::path& path, YearRange year_range);
void write_wdi_csv(const std::filesystem::path& path, std::span<const IndicatorSeries> series);

// Long layout with columns country,year,value (any column order).
std::vector<IndicatorSeries> load_target_csv(const std::filesystem::path& path);

// Adds an explicit missing entry for every year in range that has none and
// drops years outside it.
IndicatorSeries reindex(const IndicatorSeries& s, YearRange range);

// Fraction of the years in range with an observed value.
double coverage(const IndicatorSeries& s, YearRange range);

// Linear interpolation across interior gaps, nearest-value fill at the edges.
IndicatorSeries impute_series(const IndicatorSeries& s);

std::pair<std::vector<double>, NormStats> znormalize(std::span<const double> values);

CountryPanel build_panel(const IndicatorSeries& target, std::span<const IndicatorSeries> candidates,
                         std::span<const std::string> selected_codes, YearRange year_range,
                         double coverage_threshold = kDefaultCoverageThreshold);

nlohmann::json panel_to_json(const CountryPanel& panel);

} // namespace panelcast
