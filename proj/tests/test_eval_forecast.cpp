#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "panelcast/errors.hpp"
#include "panelcast/eval_forecast.hpp"

#include <random>
#include <sstream>

using namespace panelcast;

namespace {

CountryPanel panel_2008_2023(std::size_t k, double target_value = kMissing) {
    CountryPanel p;
    p.country = "BHR";
    p.features = FeatureMatrix(16, k);
    for (std::size_t c = 0; c < k; ++c) p.feature_codes.push_back("F" + std::to_string(c));
    for (int y = 2008; y <= 2023; ++y) {
        const auto r = static_cast<std::size_t>(y - 2008);
        p.years.push_back(y);
        p.target.push_back(is_missing(target_value) ? 2.0 + 0.03 * static_cast<double>(r) : target_value);
        for (std::size_t c = 0; c < k; ++c) p.features(r, c) = static_cast<double>(r * (c + 1));
    }
    return p;
}

} // namespace

TEST_CASE("mape") {
    const std::vector<double> a{100, 200};
    const std::vector<double> f{110, 190};
    CHECK(mape(a, a) == 0.0);
    CHECK(mape(a, f) == doctest::Approx(7.5).epsilon(1e-15));
    CHECK_THROWS_AS(mape(std::vector<double>{100, 0}, std::vector<double>{1, 1}), DataError);
    CHECK_THROWS_AS(mape(a, std::vector<double>{1}), ParameterError);
    CHECK_THROWS_AS(mape(std::vector<double>{}, std::vector<double>{}), ParameterError);
}

TEST_CASE("mape properties") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.5, 10);
    std::uniform_real_distribution<double> r(-0.5, 0.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(12), f(12), rel(12);
        for (auto& v : a) v = u(rng) * (trial % 2 ? 1 : -1);
        for (auto& v : f) v = u(rng);
        CHECK(std::fabs(mape(a, f) - oracle::mape_direct(a, f)) <= 1e-12);
        const double rr = r(rng);
        for (std::size_t i = 0; i < a.size(); ++i) rel[i] = a[i] * (1 + rr);
        CHECK(std::fabs(mape(a, rel) - std::fabs(rr) * 100) <= 1e-9);
    }
}

TEST_CASE("split_train_test") {
    const auto p = panel_2008_2023(2);
    const auto [train, test] = split_train_test(p, 2017);
    CHECK(train.rows() == 10);
    CHECK(test.rows() == 6);
    CHECK(train.years.back() == 2017);
    CHECK(test.years.front() == 2018);
    std::vector<int> joined = train.years;
    joined.insert(joined.end(), test.years.begin(), test.years.end());
    CHECK(joined == p.years);
    CHECK_THROWS_WITH_AS(split_train_test(p, 2023), doctest::Contains("empty test split"), DataError);
    CHECK_THROWS_AS(split_train_test(p, 2007), DataError);
}

TEST_CASE("backtest") {
    SUBCASE("constant target with no trees scores zero") {
        HyperParams hp;
        hp.n_estimators = 0;
        const auto r = backtest(panel_2008_2023(3, 2.75), hp, 1);
        CHECK(r.train_mape == 0.0);
        CHECK(r.test_mape == 0.0);
        CHECK(r.rows.size() == 16);
    }
    SUBCASE("per-year rows cover every panel year once") {
        HyperParams hp;
        hp.n_estimators = 20;
        const auto p = panel_2008_2023(3);
        const auto r = backtest(p, hp, 1);
        REQUIRE(r.rows.size() == 16);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(r.rows[i].year == p.years[i]);
            CHECK(r.rows[i].split == (p.years[i] <= 2017 ? "train" : "test"));
            CHECK(r.rows[i].actual == p.target[i]);
        }
        CHECK(r.train_mape >= 0.0);
        CHECK(r.test_mape >= 0.0);
        std::ostringstream bt, sum;
        write_backtest_csv(bt, std::vector<BacktestReport>{r});
        write_summary_csv(sum, std::vector<BacktestReport>{r});
        CHECK(bt.str().rfind("country,split,year,actual,predicted\n", 0) == 0);
        CHECK(sum.str().rfind("country,train_mape,test_mape\nBHR,", 0) == 0);
    }
}

TEST_CASE("simulate_predictors") {
    SUBCASE("two points give the exact line") {
        auto p = panel_2008_2023(1);
        for (std::size_t r = 0; r < 14; ++r) p.features(r, 0) = kMissing;
        p.features(14, 0) = 10;
        p.features(15, 0) = 12;
        const auto sim = simulate_predictors(p, 2);
        REQUIRE(sim.rows() == 2);
        CHECK(sim(0, 0) == doctest::Approx(14.0).epsilon(1e-12));
        CHECK(sim(1, 0) == doctest::Approx(16.0).epsilon(1e-12));
    }
    SUBCASE("constant feature extrapolates flat") {
        auto p = panel_2008_2023(1);
        for (std::size_t r = 0; r < 16; ++r) p.features(r, 0) = 3.5;
        const auto sim = simulate_predictors(p, 5);
        for (std::size_t i = 0; i < 5; ++i) CHECK(sim(i, 0) == doctest::Approx(3.5).epsilon(1e-12));
    }
    SUBCASE("only the trailing window is used") {
        auto p = panel_2008_2023(1);
        // An outlier early in the series must not influence the fit.
        p.features(0, 0) = 1e6;
        const auto sim = simulate_predictors(p, 1, 8);
        CHECK(sim(0, 0) == doctest::Approx(16.0).epsilon(1e-12));
    }
    SUBCASE("five horizon rows, no missing cells") {
        auto p = panel_2008_2023(4);
        p.features(15, 2) = kMissing;
        p.features(10, 1) = kMissing;
        const auto sim = simulate_predictors(p, 5);
        CHECK(sim.rows() == 5);
        CHECK(sim.cols() == 4);
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < 4; ++c) CHECK(std::isfinite(sim(r, c)));
    }
    SUBCASE("horizon zero") {
        CHECK(simulate_predictors(panel_2008_2023(2), 0).rows() == 0);
    }
    SUBCASE("fewer than two observations") {
        auto p = panel_2008_2023(1);
        for (std::size_t r = 0; r < 15; ++r) p.features(r, 0) = kMissing;
        CHECK_THROWS_WITH_AS(simulate_predictors(p, 3), doctest::Contains("F0"), DataError);
    }
}

TEST_CASE("forecast") {
    const auto p = panel_2008_2023(3);
    HyperParams hp;
    hp.n_estimators = 10;
    const auto model = fit(p, hp, 1);
    SUBCASE("five consecutive years after the panel") {
        const auto f = forecast(model, p);
        CHECK(f.horizon_years == std::vector<int>{2024, 2025, 2026, 2027, 2028});
        CHECK(f.predictions.size() == 5);
        CHECK(f.method == "ols_trend_m8");
        for (double v : f.predictions) CHECK(std::isfinite(v));
        std::ostringstream out;
        write_forecast_csv(out, std::vector<ForecastResult>{f});
        CHECK(out.str().find("BHR,2024,") != std::string::npos);
    }
    SUBCASE("empty ensemble forecasts the base score") {
        HyperParams none;
        none.n_estimators = 0;
        const auto m0 = fit(p, none, 1);
        for (double v : forecast(m0, p).predictions) CHECK(v == m0.base_score);
    }
    SUBCASE("horizon zero") {
        const auto f = forecast(model, p, 0);
        CHECK(f.predictions.empty());
        CHECK(f.horizon_years.empty());
    }
    SUBCASE("feature mismatch") {
        auto other = p;
        other.feature_codes[0] = "ZZ";
        CHECK_THROWS_AS(forecast(model, other), ParameterError);
    }
}
