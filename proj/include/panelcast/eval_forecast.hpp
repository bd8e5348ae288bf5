#pragma once

#include "panelcast/gbtree.hpp"
#include "panelcast/panel_data.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace panelcast {

// Mean absolute percentage error, in percent. Throws DataError when any
// actual value is zero instead of dropping the term.
double mape(std::span<const double> actual, std::span<const double> forecast);

inline constexpr int kDefaultLastTrainYear = 2017;
inline constexpr int kDefaultHorizon = 5;
inline constexpr std::size_t kDefaultTrendWindow = 8;

// Train rows are years <= last_train_year, test rows the years after it.
std::pair<CountryPanel, CountryPanel> split_train_test(const CountryPanel& panel, int last_train_year);

struct BacktestRow {
    std::string split; // "train" or "test"
    int year = 0;
    double actual = 0.0;
    double predicted = 0.0;
};

struct BacktestReport {
    std::string country;
    double train_mape = 0.0;
    double test_mape = 0.0;
    std::vector<BacktestRow> rows; // train rows first, each split in year order
};

// Scores an already trained model on both splits.
BacktestReport evaluate(const BoostedModel& model, const CountryPanel& train, const CountryPanel& test);
BacktestReport backtest(const CountryPanel& panel, const HyperParams& params, std::uint64_t seed,
                        int last_train_year = kDefaultLastTrainYear);

// Per feature: OLS line through the most recent `window` observed (year,
// value) points, evaluated at the next `horizon` years.
FeatureMatrix simulate_predictors(const CountryPanel& panel, int horizon, std::size_t window = kDefaultTrendWindow);

struct ForecastResult {
    std::string country;
    std::vector<int> horizon_years;
    std::vector<double> predictions;
    FeatureMatrix simulated_features; // every cell is simulated
    std::string method;               // e.g. "ols_trend_m8"
};

ForecastResult forecast(const BoostedModel& model, const CountryPanel& panel, int horizon = kDefaultHorizon,
                        std::size_t window = kDefaultTrendWindow);

std::string trend_method_name(std::size_t window);

// country,split,year,actual,predicted
void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports);
// country,train_mape,test_mape
void write_summary_csv(std::ostream& out, std::span<const BacktestReport> reports);
// country,year,predicted,method
void write_forecast_csv(std::ostream& out, std::span<const ForecastResult> results);

} // namespace panelcast
