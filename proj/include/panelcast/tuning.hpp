#pragma once

#include "panelcast/gbtree.hpp"
#include "panelcast/panel_data.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace panelcast {

// Candidate values per hyperparameter. An empty list pins that field to its
// HyperParams default.
struct GridSpec {
    std::vector<int> n_estimators;
    std::vector<double> learning_rate;
    std::vector<int> max_depth;
    std::vector<double> min_child_weight;
    std::vector<double> gamma;
    std::vector<double> subsample;
    std::vector<double> colsample_bytree;
    std::vector<double> colsample_bylevel;
    std::vector<double> lambda;
    std::vector<double> alpha;
    std::vector<double> scale_pos_weight;

    // The "typical values" surface of XGBoost's main knobs.
    static GridSpec typical_values();

    std::size_t size() const;
    // Cartesian product in lexicographic order: n_estimators varies slowest,
    // scale_pos_weight fastest, each list in its given order.
    std::vector<HyperParams> combinations() const;
    void validate() const;
};

GridSpec grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridSpec& grid);

struct CVConfig {
    std::size_t k = 3;
    bool shuffled = false; // off: contiguous chronological blocks
};

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

// k contiguous validation blocks; the first n % k blocks get one extra row.
std::vector<Fold> kfold_splits(std::size_t n, std::size_t k);
// Same block layout over a seeded permutation of the rows. Indices inside
// each fold are sorted.
std::vector<Fold> shuffled_kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed);

struct LeaderboardEntry {
    HyperParams params;
    double mean_score = 0.0; // mean validation MAPE, percent
    std::vector<double> fold_scores;
    std::size_t grid_index = 0;
};

struct DisqualifiedCombo {
    HyperParams params;
    std::size_t grid_index = 0;
    std::size_t fold = 0;
    std::string reason;
};

struct TuneResult {
    HyperParams best_params;
    double best_score = 0.0;
    std::vector<LeaderboardEntry> leaderboard; // ascending mean_score, ties by grid order
    std::vector<DisqualifiedCombo> disqualified;
};

TuneResult grid_search(const CountryPanel& panel, const GridSpec& grid, const CVConfig& cv, std::uint64_t seed);

// rank,params_json,mean_mape,fold_scores_json. Disqualified combinations
// follow the ranked rows with rank "disqualified" and the reason in place of
// the fold scores.
void write_leaderboard_csv(std::ostream& out, const TuneResult& result);

} // namespace panelcast
