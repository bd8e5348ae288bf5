#include "panelcast/config.hpp"

#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <fstream>
#include <set>
#include <sstream>

namespace panelcast {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError(fmt::format("config: unknown key '{}{}'", where, key));
}

const nlohmann::json& object_at(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", key));
    return v;
}

template <class T>
T number(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(fmt::format("config: '{}{}' must be an integer", where, key));
        if constexpr (std::is_unsigned_v<T>) {
            if (v.get<long long>() < 0 && !v.is_number_unsigned())
                throw ConfigError(fmt::format("config: '{}{}' must be non-negative", where, key));
        }
    } else {
        if (!v.is_number()) throw ConfigError(fmt::format("config: '{}{}' must be a number", where, key));
    }
    return v.get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

void PipelineConfig::validate() const {
    if (year_range.first > year_range.last)
        throw ConfigError(fmt::format("config: year_range [{}, {}] is empty", year_range.first, year_range.last));
    if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0))
        throw ConfigError(fmt::format("config: coverage_threshold {} outside [0, 1]", coverage_threshold));
    if (!(edr.epsilon > 0.0)) throw ConfigError(fmt::format("config: edr.epsilon must be > 0, got {}", edr.epsilon));
    if (edr.k == 0) throw ConfigError("config: edr.k must be positive");
    if (last_train_year < year_range.first || last_train_year >= year_range.last)
        throw ConfigError(fmt::format("config: split.last_train_year {} must lie in [{}, {})", last_train_year,
                                      year_range.first, year_range.last));
    if (cv.k < 2) throw ConfigError(fmt::format("config: cv.k must be >= 2, got {}", cv.k));
    if (forecast.horizon < 0) throw ConfigError("config: forecast.horizon must be >= 0");
    if (forecast.trend_window < 2) throw ConfigError("config: forecast.trend_window must be >= 2");
    if (grid.size() == 0) throw ConfigError("config: grid is empty");
    try {
        grid.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(fmt::format("config: grid: {}", e.what()));
    }
}

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, {"paths", "year_range", "coverage_threshold", "edr", "split", "cv", "grid", "forecast", "seed"}, "");
    PipelineConfig c;
    try {
        if (!j.contains("paths")) throw ConfigError("config: missing 'paths'");
        const auto& paths = object_at(j, "paths");
        reject_unknown(paths, {"indicators", "target", "output_dir"}, "paths.");
        for (const char* key : {"indicators", "target"})
            if (!paths.contains(key) || !paths.at(key).is_string())
                throw ConfigError(fmt::format("config: 'paths.{}' must be a string", key));
        c.paths.indicators = resolve(base_dir, paths.at("indicators").get<std::string>());
        c.paths.target = resolve(base_dir, paths.at("target").get<std::string>());
        if (paths.contains("output_dir")) {
            if (!paths.at("output_dir").is_string()) throw ConfigError("config: 'paths.output_dir' must be a string");
            c.paths.output_dir = resolve(base_dir, paths.at("output_dir").get<std::string>());
        } else {
            c.paths.output_dir = base_dir / "out";
        }

        if (j.contains("year_range")) {
            const auto& yr = j.at("year_range");
            if (!yr.is_array() || yr.size() != 2 || !yr[0].is_number_integer() || !yr[1].is_number_integer())
                throw ConfigError("config: 'year_range' must be [first, last]");
            c.year_range = {yr[0].get<int>(), yr[1].get<int>()};
        }
        if (j.contains("coverage_threshold")) c.coverage_threshold = number<double>(j, "coverage_threshold", "");
        if (j.contains("edr")) {
            const auto& e = object_at(j, "edr");
            reject_unknown(e, {"epsilon", "k"}, "edr.");
            if (e.contains("epsilon")) c.edr.epsilon = number<double>(e, "epsilon", "edr.");
            if (e.contains("k")) c.edr.k = number<std::size_t>(e, "k", "edr.");
        }
        if (j.contains("split")) {
            const auto& s = object_at(j, "split");
            reject_unknown(s, {"last_train_year"}, "split.");
            if (s.contains("last_train_year")) c.last_train_year = number<int>(s, "last_train_year", "split.");
        }
        if (j.contains("cv")) {
            const auto& cv = object_at(j, "cv");
            reject_unknown(cv, {"k", "shuffled"}, "cv.");
            if (cv.contains("k")) c.cv.k = number<std::size_t>(cv, "k", "cv.");
            if (cv.contains("shuffled")) {
                if (!cv.at("shuffled").is_boolean()) throw ConfigError("config: 'cv.shuffled' must be a boolean");
                c.cv.shuffled = cv.at("shuffled").get<bool>();
            }
        }
        if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
        if (j.contains("forecast")) {
            const auto& f = object_at(j, "forecast");
            reject_unknown(f, {"horizon", "trend_window"}, "forecast.");
            if (f.contains("horizon")) c.forecast.horizon = number<int>(f, "horizon", "forecast.");
            if (f.contains("trend_window")) c.forecast.trend_window = number<std::size_t>(f, "trend_window", "forecast.");
        }
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned()) throw ConfigError("config: 'seed' must be a non-negative integer");
            c.seed = j.at("seed").get<std::uint64_t>();
        }
    } catch (const ParameterError& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return config_from_json(j, path.parent_path());
}

nlohmann::json canonical_json(const PipelineConfig& c) {
    return {{"paths", {{"indicators", c.paths.indicators.filename().string()}, {"target", c.paths.target.filename().string()}}},
            {"year_range", {c.year_range.first, c.year_range.last}},
            {"coverage_threshold", c.coverage_threshold},
            {"edr", {{"epsilon", c.edr.epsilon}, {"k", c.edr.k}}},
            {"split", {{"last_train_year", c.last_train_year}}},
            {"cv", {{"k", c.cv.k}, {"shuffled", c.cv.shuffled}}},
            {"grid", to_json(c.grid)},
            {"forecast", {{"horizon", c.forecast.horizon}, {"trend_window", c.forecast.trend_window}}},
            {"seed", c.seed}};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace panelcast
