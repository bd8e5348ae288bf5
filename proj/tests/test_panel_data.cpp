#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "panelcast/errors.hpp"
#include "panelcast/panel_data.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace panelcast;
using testutil::TempDir;
using testutil::write_text;

namespace {

IndicatorSeries make_series(std::map<int, std::optional<double>> obs, std::string code = "X") {
    return {"BHR", std::move(code), "name", std::move(obs)};
}

} // namespace

TEST_CASE("load_wdi_csv maps blank cells to missing") {
    TempDir dir("wdi");
    write_text(dir / "w.csv",
               "country,indicator_code,indicator_name,2008,2009,2010\n"
               "BHR,NY.GDP.PCAP.CD,GDP per capita,20000,,21000\n");
    const auto series = load_wdi_csv(dir / "w.csv", {2008, 2023});
    REQUIRE(series.size() == 1);
    const auto& s = series[0];
    CHECK(s.country == "BHR");
    CHECK(s.indicator_code == "NY.GDP.PCAP.CD");
    CHECK(s.indicator_name == "GDP per capita");
    CHECK(s.observations.at(2008) == 20000.0);
    CHECK_FALSE(s.observations.at(2009).has_value());
    CHECK(s.observations.at(2010) == 21000.0);
}

TEST_CASE("load_wdi_csv restricts to the year range") {
    TempDir dir("wdi");
    write_text(dir / "w.csv",
               "country,indicator_code,indicator_name,2006,2007,2008,2023,2024\n"
               "BHR,A,a,1,2,3,4,5\n"
               "OMN,\"B\",\"name, with comma\",1,2,3,4,5\n");
    const auto series = load_wdi_csv(dir / "w.csv", {2008, 2023});
    REQUIRE(series.size() == 2);
    CHECK(series[1].indicator_name == "name, with comma");
    for (const auto& s : series) {
        for (const auto& [year, v] : s.observations) {
            CHECK(year >= 2008);
            CHECK(year <= 2023);
        }
        CHECK(s.observations.size() == 2);
    }
}

TEST_CASE("load_wdi_csv rejects bad input") {
    TempDir dir("wdi");
    SUBCASE("duplicate row names both lines") {
        write_text(dir / "w.csv",
                   "country,indicator_code,indicator_name,2008\n"
                   "BHR,A,a,1\n"
                   "OMN,A,a,1\n"
                   "BHR,A,a again,2\n");
        try {
            load_wdi_csv(dir / "w.csv", {2008, 2023});
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("lines 2 and 4") != std::string::npos);
            CHECK(msg.find("BHR") != std::string::npos);
        }
    }
    SUBCASE("malformed header") {
        write_text(dir / "w.csv", "country,code,indicator_name,2008\nBHR,A,a,1\n");
        CHECK_THROWS_AS(load_wdi_csv(dir / "w.csv", {2008, 2023}), DataError);
        write_text(dir / "w.csv", "country,indicator_code,indicator_name,year8\nBHR,A,a,1\n");
        CHECK_THROWS_AS(load_wdi_csv(dir / "w.csv", {2008, 2023}), DataError);
    }
    SUBCASE("non-numeric cell") {
        write_text(dir / "w.csv", "country,indicator_code,indicator_name,2008,2009\nBHR,A,a,1,n/a\n");
        CHECK_THROWS_WITH_AS(load_wdi_csv(dir / "w.csv", {2008, 2023}), doctest::Contains(":2:"), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_wdi_csv(dir / "nope.csv", {2008, 2023}), doctest::Contains("nope.csv"), DataError);
    }
}

TEST_CASE("load_wdi_csv and write_wdi_csv round-trip the observation map") {
    TempDir dir("wdi");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-1e6, 1e6);
    std::bernoulli_distribution blank(0.2);
    std::vector<IndicatorSeries> original;
    for (int c = 0; c < 4; ++c) {
        for (int i = 0; i < 5; ++i) {
            IndicatorSeries s{"C" + std::to_string(c), "IND." + std::to_string(i), "Name \"" + std::to_string(i) + "\", x", {}};
            for (int y = 2008; y <= 2023; ++y) s.observations[y] = blank(rng) ? std::nullopt : std::optional<double>(val(rng));
            s.observations[2008] = val(rng);
            original.push_back(s);
        }
    }
    write_wdi_csv(dir / "a.csv", original);
    const auto loaded = load_wdi_csv(dir / "a.csv", {2008, 2023});
    REQUIRE(loaded.size() == original.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].country == original[i].country);
        CHECK(loaded[i].indicator_name == original[i].indicator_name);
        CHECK(loaded[i].observations == original[i].observations);
    }
}

TEST_CASE("load_target_csv") {
    TempDir dir("target");
    SUBCASE("six countries by sixteen years") {
        std::string text = "country,year,value\n";
        for (const char* c : {"BHR", "KWT", "OMN", "QAT", "SAU", "ARE"})
            for (int y = 2008; y <= 2023; ++y) text += std::string(c) + "," + std::to_string(y) + ",2.5\n";
        write_text(dir / "t.csv", text);
        const auto series = load_target_csv(dir / "t.csv");
        REQUIRE(series.size() == 6);
        for (const auto& s : series) CHECK(s.observations.size() == 16);
    }
    SUBCASE("columns in any order") {
        write_text(dir / "t.csv", "value,country,year\n2.5,BHR,2008\n2.6,BHR,2009\n");
        const auto series = load_target_csv(dir / "t.csv");
        REQUIRE(series.size() == 1);
        CHECK(series[0].observations.at(2009) == 2.6);
    }
    SUBCASE("empty after header") {
        write_text(dir / "t.csv", "country,year,value\n");
        CHECK_THROWS_WITH_AS(load_target_csv(dir / "t.csv"), doctest::Contains("no target observations"), DataError);
    }
    SUBCASE("duplicate country-year") {
        write_text(dir / "t.csv", "country,year,value\nBHR,2015,1\nBHR,2015,2\n");
        CHECK_THROWS_AS(load_target_csv(dir / "t.csv"), DataError);
    }
    SUBCASE("missing column") {
        write_text(dir / "t.csv", "country,value\nBHR,1\n");
        CHECK_THROWS_WITH_AS(load_target_csv(dir / "t.csv"), doctest::Contains("year"), DataError);
    }
    SUBCASE("unparseable value") {
        write_text(dir / "t.csv", "country,year,value\nBHR,2015,abc\n");
        CHECK_THROWS_AS(load_target_csv(dir / "t.csv"), DataError);
    }
}

TEST_CASE("impute_series") {
    SUBCASE("interior gap is interpolated") {
        const auto out = impute_series(make_series({{2008, 10.0}, {2009, std::nullopt}, {2010, 14.0}}));
        CHECK(*out.observations.at(2009) == 12.0);
    }
    SUBCASE("leading gap takes the nearest value") {
        const auto out = impute_series(make_series({{2008, std::nullopt}, {2009, 5.0}, {2010, 5.0}}));
        CHECK(*out.observations.at(2008) == 5.0);
    }
    SUBCASE("trailing gaps and a long interior gap") {
        const auto out = impute_series(
            make_series({{2008, 0.0}, {2009, std::nullopt}, {2010, std::nullopt}, {2011, 3.0}, {2012, std::nullopt}}));
        CHECK(*out.observations.at(2009) == doctest::Approx(1.0));
        CHECK(*out.observations.at(2010) == doctest::Approx(2.0));
        CHECK(*out.observations.at(2012) == 3.0);
    }
    SUBCASE("fully observed is unchanged") {
        const auto s = make_series({{2008, 1.5}, {2009, -2.0}, {2010, 7.25}});
        CHECK(impute_series(s).observations == s.observations);
    }
    SUBCASE("fewer than two observations") {
        CHECK_THROWS_WITH_AS(impute_series(make_series({{2008, 1.0}, {2009, std::nullopt}})),
                             doctest::Contains("insufficient coverage"), DataError);
    }
}

TEST_CASE("impute_series is idempotent on random series") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> val(-50, 50);
    std::bernoulli_distribution gap(0.4);
    for (int trial = 0; trial < 200; ++trial) {
        IndicatorSeries s = make_series({});
        for (int y = 2008; y <= 2023; ++y) s.observations[y] = gap(rng) ? std::nullopt : std::optional<double>(val(rng));
        s.observations[2010] = val(rng);
        s.observations[2019] = val(rng);
        const auto once = impute_series(s);
        CHECK(once.observed_count() == once.observations.size());
        CHECK(impute_series(once).observations == once.observations);
    }
}

TEST_CASE("znormalize") {
    SUBCASE("1, 2, 3") {
        const std::vector<double> v{1, 2, 3};
        const auto [z, stats] = znormalize(v);
        CHECK(z[0] == doctest::Approx(-1.2247).epsilon(1e-4));
        CHECK(z[1] == doctest::Approx(0.0));
        CHECK(z[2] == doctest::Approx(1.2247).epsilon(1e-4));
        CHECK(stats.mean == 2.0);
        CHECK(stats.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
    }
    SUBCASE("constant series maps to zeros") {
        const std::vector<double> v{7, 7, 7};
        const auto [z, stats] = znormalize(v);
        CHECK(z == std::vector<double>{0, 0, 0});
        CHECK(stats.std == 0.0);
    }
    SUBCASE("random series have mean 0 and std 1, and normalizing again is a no-op") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> nd(100, 30);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> v(16);
            for (auto& x : v) x = nd(rng);
            const auto z = znormalize(v).first;
            double m = 0, ss = 0;
            for (double x : z) m += x;
            m /= 16;
            for (double x : z) ss += (x - m) * (x - m);
            CHECK(std::fabs(m) < 1e-9);
            CHECK(std::fabs(std::sqrt(ss / 16) - 1.0) < 1e-9);
            const auto zz = znormalize(z).first;
            for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::fabs(zz[i] - z[i]) < 1e-12);
        }
    }
}

TEST_CASE("build_panel") {
    IndicatorSeries target{"BHR", "target", "t", {}};
    std::vector<IndicatorSeries> candidates;
    std::vector<std::string> codes;
    for (int y = 2008; y <= 2023; ++y) target.observations[y] = 2.0 + 0.01 * (y - 2008) + 1e-7 / 3.0;
    for (int c = 0; c < 12; ++c) {
        IndicatorSeries s{"BHR", "C" + std::to_string(c), "n", {}};
        for (int y = 2008; y <= 2023; ++y) s.observations[y] = c * 100.0 + y;
        s.observations[2012] = std::nullopt;
        candidates.push_back(s);
        if (c < 10) codes.push_back(s.indicator_code);
    }
    candidates.push_back({"OMN", "ONLY_OMN", "n", {{2008, 1.0}, {2009, 2.0}}});

    SUBCASE("ten codes over 2008-2023 give a 16 x 10 matrix of raw values") {
        const auto p = build_panel(target, candidates, codes, {2008, 2023});
        CHECK(p.features.rows() == 16);
        CHECK(p.features.cols() == 10);
        CHECK(p.feature_codes == codes);
        CHECK(p.features(0, 3) == 300.0 + 2008);
        CHECK(is_missing(p.features(4, 0)));
        for (std::size_t r = 0; r < p.rows(); ++r) CHECK(p.target[r] == *target.observations.at(p.years[r]));
        CHECK_FALSE(p.has_no_features());
    }
    SUBCASE("empty selection is valid but flagged") {
        const auto p = build_panel(target, candidates, {}, {2008, 2023});
        CHECK(p.features.cols() == 0);
        CHECK(p.has_no_features());
        CHECK(p.rows() == 16);
    }
    SUBCASE("unknown code") {
        const std::vector<std::string> bad{"XX"};
        CHECK_THROWS_WITH_AS(build_panel(target, candidates, bad, {2008, 2023}),
                             doctest::Contains("indicator XX not found for BHR"), DataError);
        const std::vector<std::string> other{"ONLY_OMN"};
        CHECK_THROWS_AS(build_panel(target, candidates, other, {2008, 2023}), DataError);
    }
    SUBCASE("target gaps are imputed, observed target values stay bit-exact") {
        auto gappy = target;
        gappy.observations[2015] = std::nullopt;
        const auto p = build_panel(gappy, candidates, codes, {2008, 2023});
        CHECK(p.target[7] == doctest::Approx(0.5 * (*target.observations.at(2014) + *target.observations.at(2016))));
        CHECK(p.target[6] == *target.observations.at(2014));
    }
    SUBCASE("panel JSON export marks missing cells as null") {
        const auto p = build_panel(target, candidates, codes, {2008, 2023});
        const auto j = panel_to_json(p);
        CHECK(j["country"] == "BHR");
        CHECK(j["years"].size() == 16);
        CHECK(j["features"][4][0].is_null());
        CHECK(j["features"][0][3] == 2308.0);
    }
}
