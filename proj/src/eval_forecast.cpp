#include "panelcast/eval_forecast.hpp"

#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace panelcast {

double mape(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size())
        throw ParameterError(fmt::format("MAPE inputs differ in length: {} vs {}", actual.size(), forecast.size()));
    if (actual.empty()) throw ParameterError("MAPE of empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) throw DataError(fmt::format("MAPE undefined: actual value at position {} is zero", i));
        sum += std::fabs((actual[i] - forecast[i]) / actual[i]);
    }
    return sum / static_cast<double>(actual.size()) * 100.0;
}

std::pair<CountryPanel, CountryPanel> split_train_test(const CountryPanel& panel, int last_train_year) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t r = 0; r < panel.rows(); ++r) (panel.years[r] <= last_train_year ? train : test).push_back(r);
    if (train.empty()) throw DataError(fmt::format("{}: empty train split at last_train_year {}", panel.country, last_train_year));
    if (test.empty()) throw DataError(fmt::format("{}: empty test split at last_train_year {}", panel.country, last_train_year));
    return {panel.select_rows(train), panel.select_rows(test)};
}

BacktestReport evaluate(const BoostedModel& model, const CountryPanel& train, const CountryPanel& test) {
    if (model.feature_codes != train.feature_codes || model.feature_codes != test.feature_codes)
        throw ParameterError(fmt::format("{}: model features do not match the panel", train.country));
    BacktestReport report;
    report.country = train.country;
    const auto in_sample = predict(model, train.features);
    const auto out_sample = predict(model, test.features);
    report.train_mape = mape(train.target, in_sample);
    report.test_mape = mape(test.target, out_sample);
    for (std::size_t i = 0; i < train.rows(); ++i) report.rows.push_back({"train", train.years[i], train.target[i], in_sample[i]});
    for (std::size_t i = 0; i < test.rows(); ++i) report.rows.push_back({"test", test.years[i], test.target[i], out_sample[i]});
    return report;
}

BacktestReport backtest(const CountryPanel& panel, const HyperParams& params, std::uint64_t seed, int last_train_year) {
    const auto [train, test] = split_train_test(panel, last_train_year);
    return evaluate(fit(train, params, seed), train, test);
}

FeatureMatrix simulate_predictors(const CountryPanel& panel, int horizon, std::size_t window) {
    if (horizon < 0) throw ParameterError(fmt::format("horizon must be >= 0, got {}", horizon));
    if (window < 2) throw ParameterError(fmt::format("trend window must be >= 2, got {}", window));
    const auto h = static_cast<std::size_t>(horizon);
    FeatureMatrix out(h, panel.features.cols(), 0.0);
    if (h == 0) return out;
    const int last_year = panel.years.empty() ? 0 : panel.years.back();

    for (std::size_t c = 0; c < panel.features.cols(); ++c) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = panel.rows(); r-- > 0 && pts.size() < window;) {
            const double v = panel.features(r, c);
            if (!is_missing(v)) pts.emplace_back(static_cast<double>(panel.years[r]), v);
        }
        if (pts.size() < 2)
            throw DataError(fmt::format("{}: feature {} has fewer than 2 observed values to extrapolate", panel.country,
                                        panel.feature_codes.at(c)));
        double mx = 0.0;
        double my = 0.0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (const auto& [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        const double slope = sxy / sxx;
        for (std::size_t i = 0; i < h; ++i) {
            const double year = static_cast<double>(last_year) + static_cast<double>(i + 1);
            out(i, c) = my + slope * (year - mx);
        }
    }
    return out;
}

std::string trend_method_name(std::size_t window) { return fmt::format("ols_trend_m{}", window); }

ForecastResult forecast(const BoostedModel& model, const CountryPanel& panel, int horizon, std::size_t window) {
    if (model.feature_codes != panel.feature_codes)
        throw ParameterError(fmt::format("{}: model features do not match the panel", panel.country));
    ForecastResult result;
    result.country = panel.country;
    result.method = trend_method_name(window);
    result.simulated_features = simulate_predictors(panel, horizon, window);
    const int last_year = panel.years.empty() ? 0 : panel.years.back();
    for (int i = 1; i <= horizon; ++i) {
        result.horizon_years.push_back(last_year + i);
        result.predictions.push_back(predict(model, result.simulated_features.row(static_cast<std::size_t>(i - 1))));
    }
    return result;
}

void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "country,split,year,actual,predicted\n";
    for (const auto& r : reports)
        for (const auto& row : r.rows)
            out << fmt::format("{},{},{},{},{}\n", r.country, row.split, row.year, row.actual, row.predicted);
}

void write_summary_csv(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "country,train_mape,test_mape\n";
    for (const auto& r : reports) out << fmt::format("{},{:.6f},{:.6f}\n", r.country, r.train_mape, r.test_mape);
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastResult> results) {
    out << "country,year,predicted,method\n";
    for (const auto& r : results)
        for (std::size_t i = 0; i < r.predictions.size(); ++i)
            out << fmt::format("{},{},{},{}\n", r.country, r.horizon_years[i], r.predictions[i], r.method);
}

} // namespace panelcast
