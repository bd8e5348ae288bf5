#include "panelcast/panel_data.hpp"

#include "panelcast/csv.hpp"
#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace panelcast {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("{}: cannot open file", path.string()));
    return in;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return fmt::format("{}:{}", path.string(), line);
}

} // namespace

std::size_t IndicatorSeries::observed_count() const {
    return static_cast<std::size_t>(std::count_if(observations.begin(), observations.end(),
                                                  [](const auto& kv) { return kv.second.has_value(); }));
}

std::vector<double> IndicatorSeries::values() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& [year, v] : observations) {
        if (!v) throw DataError(fmt::format("{} {}: missing value at {}", country, indicator_code, year));
        out.push_back(*v);
    }
    return out;
}

CountryPanel CountryPanel::select_rows(std::span<const std::size_t> rows) const {
    CountryPanel out;
    out.country = country;
    out.feature_codes = feature_codes;
    out.features = features.select_rows(rows);
    out.years.reserve(rows.size());
    out.target.reserve(rows.size());
    for (auto r : rows) {
        out.years.push_back(years.at(r));
        out.target.push_back(target.at(r));
    }
    return out;
}

std::vector<IndicatorSeries> load_wdi_csv(const std::filesystem::path& path, YearRange year_range) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file, expected header", path.string()));
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = csv::split_line(line);
    if (header.size() < 4 || csv::trim(header[0]) != "country" || csv::trim(header[1]) != "indicator_code" ||
        csv::trim(header[2]) != "indicator_name") {
        throw DataError(fmt::format("{}: malformed header, expected country,indicator_code,indicator_name,<year>...",
                                    where(path, 1)));
    }
    std::vector<int> years;
    for (std::size_t c = 3; c < header.size(); ++c) {
        const auto y = csv::parse_integer(header[c]);
        if (!y) throw DataError(fmt::format("{}: malformed header, column {} is not a year: '{}'", where(path, 1), c + 1, header[c]));
        const int year = static_cast<int>(*y);
        if (std::find(years.begin(), years.end(), year) != years.end())
            throw DataError(fmt::format("{}: malformed header, duplicate year {}", where(path, 1), year));
        years.push_back(year);
    }

    std::vector<IndicatorSeries> out;
    std::map<std::pair<std::string, std::string>, std::size_t> seen; // key -> line number
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size())
            throw DataError(fmt::format("{}: expected {} fields, found {}", where(path, line_no), header.size(), fields.size()));

        IndicatorSeries s;
        s.country = std::string(csv::trim(fields[0]));
        s.indicator_code = std::string(csv::trim(fields[1]));
        s.indicator_name = std::string(csv::trim(fields[2]));
        if (s.country.empty() || s.indicator_code.empty())
            throw DataError(fmt::format("{}: empty country or indicator code", where(path, line_no)));

        const auto key = std::make_pair(s.country, s.indicator_code);
        if (auto it = seen.find(key); it != seen.end()) {
            throw DataError(fmt::format("{}: duplicate row ({}, {}) at lines {} and {}", path.string(), s.country,
                                        s.indicator_code, it->second, line_no));
        }
        seen.emplace(key, line_no);

        for (std::size_t c = 3; c < fields.size(); ++c) {
            const auto cell = csv::trim(fields[c]);
            std::optional<double> value;
            if (!cell.empty()) {
                value = csv::parse_number(cell);
                if (!value)
                    throw DataError(fmt::format("{}: non-numeric value '{}' in year {}", where(path, line_no), cell, years[c - 3]));
            }
            if (year_range.contains(years[c - 3])) s.observations[years[c - 3]] = value;
        }
        if (s.observed_count() > 0) out.push_back(std::move(s));
    }
    return out;
}

void write_wdi_csv(const std::filesystem::path& path, std::span<const IndicatorSeries> series) {
    std::vector<int> years;
    for (const auto& s : series)
        for (const auto& [y, v] : s.observations) years.push_back(y);
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("{}: cannot open for writing", path.string()));
    out << "country,indicator_code,indicator_name";
    for (int y : years) out << ',' << y;
    out << '\n';
    for (const auto& s : series) {
        out << csv::escape(s.country) << ',' << csv::escape(s.indicator_code) << ',' << csv::escape(s.indicator_name);
        for (int y : years) {
            out << ',';
            if (auto it = s.observations.find(y); it != s.observations.end() && it->second) out << fmt::format("{}", *it->second);
        }
        out << '\n';
    }
}

std::vector<IndicatorSeries> load_target_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(fmt::format("{}: empty file, expected header", path.string()));
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = csv::split_line(line);
    auto column = [&](std::string_view name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (csv::trim(header[i]) == name) return i;
        throw DataError(fmt::format("{}: missing column '{}'", where(path, 1), name));
    };
    const std::size_t c_country = column("country");
    const std::size_t c_year = column("year");
    const std::size_t c_value = column("value");

    std::map<std::string, IndicatorSeries> by_country;
    std::size_t line_no = 1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size())
            throw DataError(fmt::format("{}: expected {} fields, found {}", where(path, line_no), header.size(), fields.size()));
        const std::string country(csv::trim(fields[c_country]));
        const auto year = csv::parse_integer(fields[c_year]);
        if (country.empty()) throw DataError(fmt::format("{}: empty country", where(path, line_no)));
        if (!year) throw DataError(fmt::format("{}: unparseable year '{}'", where(path, line_no), fields[c_year]));
        std::optional<double> value;
        if (!csv::trim(fields[c_value]).empty()) {
            value = csv::parse_number(fields[c_value]);
            if (!value) throw DataError(fmt::format("{}: unparseable value '{}'", where(path, line_no), fields[c_value]));
        }
        auto& s = by_country[country];
        if (s.country.empty()) {
            s.country = country;
            s.indicator_code = "target";
            s.indicator_name = "safety and security index";
        }
        const auto [it, inserted] = s.observations.emplace(static_cast<int>(*year), value);
        if (!inserted) throw DataError(fmt::format("{}: duplicate ({}, {})", where(path, line_no), country, *year));
        ++rows;
    }
    if (rows == 0) throw DataError(fmt::format("{}: no target observations", path.string()));

    std::vector<IndicatorSeries> out;
    for (auto& [country, s] : by_country) {
        if (s.observed_count() == 0) throw DataError(fmt::format("{}: no observed target values for {}", path.string(), country));
        out.push_back(std::move(s));
    }
    return out;
}

IndicatorSeries reindex(const IndicatorSeries& s, YearRange range) {
    IndicatorSeries out{s.country, s.indicator_code, s.indicator_name, {}};
    for (int y = range.first; y <= range.last; ++y) {
        auto it = s.observations.find(y);
        out.observations[y] = it != s.observations.end() ? it->second : std::nullopt;
    }
    return out;
}

double coverage(const IndicatorSeries& s, YearRange range) {
    if (range.size() == 0) return 0.0;
    std::size_t n = 0;
    for (const auto& [y, v] : s.observations)
        if (v && range.contains(y)) ++n;
    return static_cast<double>(n) / static_cast<double>(range.size());
}

IndicatorSeries impute_series(const IndicatorSeries& s) {
    if (s.observed_count() < 2)
        throw DataError(fmt::format("{} {}: insufficient coverage for imputation", s.country, s.indicator_code));

    std::vector<std::pair<int, double>> known;
    for (const auto& [y, v] : s.observations)
        if (v) known.emplace_back(y, *v);

    IndicatorSeries out = s;
    std::size_t next = 0; // first known point with year >= current
    for (auto& [year, v] : out.observations) {
        while (next < known.size() && known[next].first < year) ++next;
        if (v) continue;
        if (next == 0) {
            v = known.front().second;
        } else if (next == known.size()) {
            v = known.back().second;
        } else {
            const auto [y0, v0] = known[next - 1];
            const auto [y1, v1] = known[next];
            const double t = static_cast<double>(year - y0) / static_cast<double>(y1 - y0);
            v = v0 + t * (v1 - v0);
        }
    }
    return out;
}

std::pair<std::vector<double>, NormStats> znormalize(std::span<const double> values) {
    NormStats stats;
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return {out, stats};
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.std = std::sqrt(ss / n);
    if (stats.std > 0.0) {
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - stats.mean) / stats.std;
    }
    return {out, stats};
}

CountryPanel build_panel(const IndicatorSeries& target, std::span<const IndicatorSeries> candidates,
                         std::span<const std::string> selected_codes, YearRange year_range,
                         double coverage_threshold) {
    const auto filled = impute_series(reindex(target, year_range));

    CountryPanel panel;
    panel.country = target.country;
    for (const auto& [y, v] : filled.observations) {
        panel.years.push_back(y);
        panel.target.push_back(*v);
    }
    panel.features = FeatureMatrix(panel.years.size(), selected_codes.size());
    panel.feature_codes.assign(selected_codes.begin(), selected_codes.end());

    for (std::size_t c = 0; c < selected_codes.size(); ++c) {
        const auto& code = selected_codes[c];
        const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const IndicatorSeries& s) {
            return s.country == target.country && s.indicator_code == code;
        });
        if (it == candidates.end()) throw DataError(fmt::format("indicator {} not found for {}", code, target.country));
        if (coverage(*it, year_range) < coverage_threshold)
            throw DataError(fmt::format("indicator {} for {} is below the coverage threshold {}", code,
                                        target.country, coverage_threshold));
        for (std::size_t r = 0; r < panel.years.size(); ++r) {
            const auto obs = it->observations.find(panel.years[r]);
            if (obs != it->observations.end() && obs->second) panel.features(r, c) = *obs->second;
        }
    }
    return panel;
}

nlohmann::json panel_to_json(const CountryPanel& panel) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < panel.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (double v : panel.features.row(r)) row.push_back(is_missing(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
        rows.push_back(std::move(row));
    }
    return {{"country", panel.country},
            {"years", panel.years},
            {"target", panel.target},
            {"feature_codes", panel.feature_codes},
            {"features", std::move(rows)}};
}

} // namespace panelcast
