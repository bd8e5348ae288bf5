#include "panelcast/tuning.hpp"

#include "panelcast/csv.hpp"
#include "panelcast/errors.hpp"
#include "panelcast/eval_forecast.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <ostream>

namespace panelcast {

GridSpec GridSpec::typical_values() {
    GridSpec g;
    g.n_estimators = {100, 500, 1000};
    g.learning_rate = {0.01, 0.1, 0.3};
    g.max_depth = {3, 5, 7, 10};
    g.min_child_weight = {1, 3, 5};
    g.gamma = {0, 0.1, 0.5, 1};
    g.subsample = {0.6, 0.8, 1};
    g.colsample_bytree = {0.6, 0.8, 1};
    g.colsample_bylevel = {0.6, 0.8, 1};
    g.lambda = {0, 1, 5, 10};
    g.alpha = {0, 1, 5, 10};
    g.scale_pos_weight = {1};
    return g;
}

namespace {

template <class T>
std::size_t extent(const std::vector<T>& v) {
    return v.empty() ? 1 : v.size();
}

// Expands one field: for every partial combination, one copy per value.
template <class T>
void expand(std::vector<HyperParams>& combos, const std::vector<T>& values, T HyperParams::*member) {
    if (values.empty()) return;
    std::vector<HyperParams> out;
    out.reserve(combos.size() * values.size());
    for (const auto& base : combos) {
        for (const auto& v : values) {
            auto p = base;
            p.*member = v;
            out.push_back(p);
        }
    }
    combos = std::move(out);
}

} // namespace

std::size_t GridSpec::size() const {
    return extent(n_estimators) * extent(learning_rate) * extent(max_depth) * extent(min_child_weight) *
           extent(gamma) * extent(subsample) * extent(colsample_bytree) * extent(colsample_bylevel) *
           extent(lambda) * extent(alpha) * extent(scale_pos_weight);
}

std::vector<HyperParams> GridSpec::combinations() const {
    std::vector<HyperParams> combos{HyperParams{}};
    expand(combos, n_estimators, &HyperParams::n_estimators);
    expand(combos, learning_rate, &HyperParams::learning_rate);
    expand(combos, max_depth, &HyperParams::max_depth);
    expand(combos, min_child_weight, &HyperParams::min_child_weight);
    expand(combos, gamma, &HyperParams::gamma);
    expand(combos, subsample, &HyperParams::subsample);
    expand(combos, colsample_bytree, &HyperParams::colsample_bytree);
    expand(combos, colsample_bylevel, &HyperParams::colsample_bylevel);
    expand(combos, lambda, &HyperParams::lambda);
    expand(combos, alpha, &HyperParams::alpha);
    expand(combos, scale_pos_weight, &HyperParams::scale_pos_weight);
    return combos;
}

void GridSpec::validate() const {
    // Checking each list value on its own against a default combination.
    auto check = [](const auto& values, auto member) {
        for (const auto& v : values) {
            HyperParams p;
            p.*member = v;
            p.validate();
        }
    };
    check(n_estimators, &HyperParams::n_estimators);
    check(learning_rate, &HyperParams::learning_rate);
    check(max_depth, &HyperParams::max_depth);
    check(min_child_weight, &HyperParams::min_child_weight);
    check(gamma, &HyperParams::gamma);
    check(subsample, &HyperParams::subsample);
    check(colsample_bytree, &HyperParams::colsample_bytree);
    check(colsample_bylevel, &HyperParams::colsample_bylevel);
    check(lambda, &HyperParams::lambda);
    check(alpha, &HyperParams::alpha);
    check(scale_pos_weight, &HyperParams::scale_pos_weight);
}

GridSpec grid_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("grid must be a JSON object of value lists");
    GridSpec g;
    auto read = [&](const std::string& key, auto& list) {
        using T = typename std::decay_t<decltype(list)>::value_type;
        const auto& values = j.at(key);
        if (!values.is_array() || values.empty())
            throw ParameterError(fmt::format("grid.{} must be a non-empty array", key));
        for (const auto& v : values) {
            if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) throw ParameterError(fmt::format("grid.{} values must be integers", key));
            } else {
                if (!v.is_number()) throw ParameterError(fmt::format("grid.{} values must be numbers", key));
            }
            list.push_back(v.get<T>());
        }
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "n_estimators") read(key, g.n_estimators);
        else if (key == "learning_rate") read(key, g.learning_rate);
        else if (key == "max_depth") read(key, g.max_depth);
        else if (key == "min_child_weight") read(key, g.min_child_weight);
        else if (key == "gamma") read(key, g.gamma);
        else if (key == "subsample") read(key, g.subsample);
        else if (key == "colsample_bytree") read(key, g.colsample_bytree);
        else if (key == "colsample_bylevel") read(key, g.colsample_bylevel);
        else if (key == "lambda") read(key, g.lambda);
        else if (key == "alpha") read(key, g.alpha);
        else if (key == "scale_pos_weight") read(key, g.scale_pos_weight);
        else throw ParameterError(fmt::format("unknown grid field '{}'", key));
    }
    g.validate();
    return g;
}

nlohmann::json to_json(const GridSpec& g) {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&](const char* key, const auto& list) {
        if (!list.empty()) j[key] = list;
    };
    put("n_estimators", g.n_estimators);
    put("learning_rate", g.learning_rate);
    put("max_depth", g.max_depth);
    put("min_child_weight", g.min_child_weight);
    put("gamma", g.gamma);
    put("subsample", g.subsample);
    put("colsample_bytree", g.colsample_bytree);
    put("colsample_bylevel", g.colsample_bylevel);
    put("lambda", g.lambda);
    put("alpha", g.alpha);
    put("scale_pos_weight", g.scale_pos_weight);
    return j;
}

namespace {

std::vector<Fold> blocks_over(const std::vector<std::size_t>& order, std::size_t k) {
    const std::size_t n = order.size();
    if (k < 2) throw ParameterError(fmt::format("cross-validation needs k >= 2, got {}", k));
    if (k > n) throw ParameterError(fmt::format("cross-validation k = {} exceeds {} rows", k, n));

    std::vector<Fold> folds(k);
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = n / k + (f < n % k ? 1 : 0);
        std::vector<bool> in_block(n, false);
        for (std::size_t i = start; i < start + len; ++i) in_block[order[i]] = true;
        for (std::size_t r = 0; r < n; ++r) (in_block[r] ? folds[f].validation : folds[f].train).push_back(r);
        start += len;
    }
    return folds;
}

} // namespace

std::vector<Fold> kfold_splits(std::size_t n, std::size_t k) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    return blocks_over(order, k);
}

std::vector<Fold> shuffled_kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    return blocks_over(shuffled_indices(n, rng), k);
}

TuneResult grid_search(const CountryPanel& panel, const GridSpec& grid, const CVConfig& cv, std::uint64_t seed) {
    grid.validate();
    if (panel.rows() < cv.k)
        throw ParameterError(fmt::format("{}: {} rows cannot be split into {} folds", panel.country, panel.rows(), cv.k));
    const auto folds = cv.shuffled ? shuffled_kfold_splits(panel.rows(), cv.k, seed) : kfold_splits(panel.rows(), cv.k);
    for (const auto& f : folds) {
        if (f.train.size() < 2)
            throw ParameterError(fmt::format("{}: a fold leaves only {} training rows", panel.country, f.train.size()));
    }

    std::vector<CountryPanel> train_sets;
    std::vector<CountryPanel> validation_sets;
    for (const auto& f : folds) {
        train_sets.push_back(panel.select_rows(f.train));
        validation_sets.push_back(panel.select_rows(f.validation));
    }

    TuneResult result;
    const auto combos = grid.combinations();
    for (std::size_t c = 0; c < combos.size(); ++c) {
        LeaderboardEntry entry{combos[c], 0.0, {}, c};
        bool ok = true;
        for (std::size_t f = 0; f < folds.size() && ok; ++f) {
            const auto model = fit(train_sets[f], combos[c], seed);
            const auto predicted = predict(model, validation_sets[f].features);
            try {
                entry.fold_scores.push_back(mape(validation_sets[f].target, predicted));
            } catch (const DataError& e) {
                result.disqualified.push_back({combos[c], c, f, e.what()});
                ok = false;
            }
        }
        if (!ok) continue;
        double sum = 0.0;
        for (double s : entry.fold_scores) sum += s;
        entry.mean_score = sum / static_cast<double>(entry.fold_scores.size());
        result.leaderboard.push_back(std::move(entry));
    }
    if (result.leaderboard.empty())
        throw DataError(fmt::format("{}: every grid combination was disqualified ({})", panel.country,
                                    result.disqualified.empty() ? "empty grid" : result.disqualified.front().reason));

    std::stable_sort(result.leaderboard.begin(), result.leaderboard.end(),
                     [](const LeaderboardEntry& a, const LeaderboardEntry& b) { return a.mean_score < b.mean_score; });
    result.best_params = result.leaderboard.front().params;
    result.best_score = result.leaderboard.front().mean_score;
    return result;
}

void write_leaderboard_csv(std::ostream& out, const TuneResult& result) {
    out << "rank,params_json,mean_mape,fold_scores_json\n";
    for (std::size_t i = 0; i < result.leaderboard.size(); ++i) {
        const auto& e = result.leaderboard[i];
        out << (i + 1) << ',' << csv::escape(to_json(e.params).dump()) << ',' << fmt::format("{}", e.mean_score) << ','
            << csv::escape(nlohmann::json(e.fold_scores).dump()) << '\n';
    }
    for (const auto& d : result.disqualified) {
        const nlohmann::json why = {{"fold", d.fold}, {"error", d.reason}};
        out << "disqualified," << csv::escape(to_json(d.params).dump()) << ",," << csv::escape(why.dump()) << '\n';
    }
}

} // namespace panelcast
