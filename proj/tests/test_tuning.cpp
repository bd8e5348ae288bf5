#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "panelcast/errors.hpp"
#include "panelcast/eval_forecast.hpp"
#include "panelcast/tuning.hpp"

#include <random>
#include <set>
#include <sstream>

using namespace panelcast;

namespace {

CountryPanel synthetic_panel(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CountryPanel p;
    p.country = "TST";
    p.feature_codes = {"f0", "f1"};
    p.features = FeatureMatrix(n, 2);
    for (std::size_t r = 0; r < n; ++r) {
        p.years.push_back(2008 + static_cast<int>(r));
        p.features(r, 0) = static_cast<double>(r) + 0.1 * nd(rng);
        p.features(r, 1) = nd(rng);
        p.target.push_back(2.5 + 0.05 * static_cast<double>(r) + 0.02 * nd(rng));
    }
    return p;
}

} // namespace

TEST_CASE("kfold_splits") {
    SUBCASE("even partition") {
        const auto folds = kfold_splits(10, 5);
        REQUIRE(folds.size() == 5);
        for (std::size_t f = 0; f < 5; ++f) CHECK(folds[f].validation == std::vector<std::size_t>{2 * f, 2 * f + 1});
    }
    SUBCASE("remainder goes to the earliest folds") {
        const auto folds = kfold_splits(10, 3);
        CHECK(folds[0].validation == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK(folds[1].validation == std::vector<std::size_t>{4, 5, 6});
        CHECK(folds[2].validation == std::vector<std::size_t>{7, 8, 9});
    }
    SUBCASE("every index lands in exactly one validation block, train is the complement") {
        for (std::size_t n = 2; n <= 30; ++n) {
            for (std::size_t k = 2; k <= n; ++k) {
                for (const auto& folds : {kfold_splits(n, k), shuffled_kfold_splits(n, k, n * 31 + k)}) {
                    std::vector<int> hits(n, 0);
                    std::size_t lo = n, hi = 0;
                    for (const auto& f : folds) {
                        lo = std::min(lo, f.validation.size());
                        hi = std::max(hi, f.validation.size());
                        for (auto i : f.validation) ++hits[i];
                        CHECK(f.train.size() + f.validation.size() == n);
                        std::set<std::size_t> all(f.train.begin(), f.train.end());
                        all.insert(f.validation.begin(), f.validation.end());
                        CHECK(all.size() == n);
                    }
                    CHECK(hi - lo <= 1);
                    for (int h : hits) CHECK(h == 1);
                }
            }
        }
    }
    SUBCASE("bad k") {
        CHECK_THROWS_AS(kfold_splits(5, 6), ParameterError);
        CHECK_THROWS_AS(kfold_splits(5, 1), ParameterError);
    }
}

TEST_CASE("GridSpec") {
    GridSpec g;
    CHECK(g.size() == 1);
    CHECK(g.combinations().size() == 1);
    CHECK(g.combinations()[0] == HyperParams{});

    g.n_estimators = {10, 20};
    g.learning_rate = {0.1, 0.2, 0.3};
    const auto combos = g.combinations();
    REQUIRE(combos.size() == 6);
    CHECK(combos[0].n_estimators == 10);
    CHECK(combos[0].learning_rate == 0.1);
    CHECK(combos[1].learning_rate == 0.2);
    CHECK(combos[3].n_estimators == 20);
    CHECK(combos[3].learning_rate == 0.1);

    CHECK(GridSpec::typical_values().size() == 3ull * 3 * 4 * 3 * 4 * 3 * 3 * 3 * 4 * 4 * 1);

    g.subsample = {1.2};
    CHECK_THROWS_AS(g.validate(), ParameterError);

    const auto parsed = grid_from_json(nlohmann::json::parse(R"({"n_estimators":[1,2],"lambda":[0,1.5]})"));
    CHECK(parsed.size() == 4);
    CHECK(grid_from_json(to_json(parsed)).combinations() == parsed.combinations());
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"trees":[1]})")), ParameterError);
    CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"max_depth":[1.5]})")), ParameterError);
}

TEST_CASE("grid_search") {
    const auto panel = synthetic_panel(10, 3);
    CVConfig cv;

    SUBCASE("singleton grid") {
        GridSpec g;
        g.n_estimators = {20};
        const auto r = grid_search(panel, g, cv, 1);
        REQUIRE(r.leaderboard.size() == 1);
        CHECK(r.best_params.n_estimators == 20);
        CHECK(r.best_score == r.leaderboard[0].mean_score);
        CHECK(r.leaderboard[0].fold_scores.size() == 3);
    }
    SUBCASE("a zero-round combo is scored as the mean-only model") {
        GridSpec g;
        g.n_estimators = {30, 0};
        const auto r = grid_search(panel, g, cv, 1);
        REQUIRE(r.leaderboard.size() == 2);
        const auto& zero = r.leaderboard[0].params.n_estimators == 0 ? r.leaderboard[0] : r.leaderboard[1];
        const auto folds = kfold_splits(10, 3);
        for (std::size_t f = 0; f < 3; ++f) {
            const auto train = panel.select_rows(folds[f].train);
            const auto val = panel.select_rows(folds[f].validation);
            double mean = 0;
            for (double v : train.target) mean += v;
            mean /= static_cast<double>(train.target.size());
            const std::vector<double> flat(val.target.size(), mean);
            CHECK(zero.fold_scores[f] == doctest::Approx(oracle::mape_direct(val.target, flat)).epsilon(1e-12));
        }
    }
    SUBCASE("per-fold scores can be recomputed independently") {
        GridSpec g;
        g.n_estimators = {10, 40};
        g.max_depth = {1, 3};
        const auto r = grid_search(panel, g, cv, 77);
        const auto folds = kfold_splits(10, 3);
        for (const auto& e : r.leaderboard) {
            for (std::size_t f = 0; f < 3; ++f) {
                const auto model = fit(panel.select_rows(folds[f].train), e.params, 77);
                const auto val = panel.select_rows(folds[f].validation);
                CHECK(e.fold_scores[f] == mape(val.target, predict(model, val.features)));
            }
        }
        for (std::size_t i = 1; i < r.leaderboard.size(); ++i)
            CHECK(r.leaderboard[i - 1].mean_score <= r.leaderboard[i].mean_score);
    }
    SUBCASE("equal scores keep grid order") {
        // lambda has no effect when n_estimators = 0, so all three tie.
        GridSpec g;
        g.n_estimators = {0};
        g.lambda = {5, 0, 1};
        const auto r = grid_search(panel, g, cv, 1);
        REQUIRE(r.leaderboard.size() == 3);
        CHECK(r.best_params.lambda == 5);
        CHECK(r.leaderboard[1].params.lambda == 0);
        CHECK(r.leaderboard[2].params.lambda == 1);
    }
    SUBCASE("zero actuals disqualify combos") {
        auto zeroed = panel;
        zeroed.target[0] = 0.0;
        GridSpec g;
        g.n_estimators = {5, 10};
        CHECK_THROWS_WITH_AS(grid_search(zeroed, g, cv, 1), doctest::Contains("disqualified"), DataError);
    }
    SUBCASE("deterministic, and the leaderboard CSV has one row per combo") {
        GridSpec g;
        g.n_estimators = {5, 10, 15};
        g.max_depth = {1, 2, 3};
        g.subsample = {0.7};
        const auto a = grid_search(panel, g, cv, 3);
        const auto b = grid_search(panel, g, cv, 3);
        std::ostringstream sa, sb;
        write_leaderboard_csv(sa, a);
        write_leaderboard_csv(sb, b);
        const auto text = sa.str();
        CHECK(text == sb.str());
        CHECK(std::count(text.begin(), text.end(), '\n') == 10);
    }
    SUBCASE("too few rows for k") {
        GridSpec g;
        CVConfig big{11, false};
        CHECK_THROWS_AS(grid_search(panel, g, big, 1), ParameterError);
    }
}
