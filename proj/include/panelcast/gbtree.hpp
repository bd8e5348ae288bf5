#pragma once

#include "panelcast/matrix.hpp"
#include "panelcast/panel_data.hpp"
#include "panelcast/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace panelcast {

// Booster settings. Defaults follow the common XGBoost defaults.
struct HyperParams {
    int n_estimators = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double min_child_weight = 1.0; // minimum hessian sum in each child
    double gamma = 0.0;            // minimum split gain (per-leaf penalty)
    double subsample = 1.0;        // row fraction per tree
    double colsample_bytree = 1.0;
    double colsample_bylevel = 1.0;
    double lambda = 1.0;           // L2 penalty on leaf weights
    double alpha = 0.0;            // L1 penalty on leaf weights
    double scale_pos_weight = 1.0; // accepted, unused for regression

    // Throws ParameterError on the first out-of-range field.
    void validate() const;

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

nlohmann::json to_json(const HyperParams& p);
// Reads any subset of fields; absent fields keep their defaults. Validates.
HyperParams hyperparams_from_json(const nlohmann::json& j);

// Flat node storage. A node is a leaf when it has no children.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    int left = -1;
    int right = -1;
    double weight = 0.0; // leaf output
    double gain = 0.0;   // split gain for internal nodes

    bool is_leaf() const { return left < 0; }
};

// Routing: value < threshold goes left, value >= threshold goes right, a
// missing value follows default_left.
class RegressionTree {
public:
    RegressionTree() : nodes_{TreeNode{}} {}
    explicit RegressionTree(std::vector<TreeNode> nodes);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }

    std::size_t num_leaves() const;
    std::size_t depth() const;
    // Index of the leaf reached by row.
    std::size_t leaf_for(std::span<const double> row) const;
    double predict(std::span<const double> row) const { return nodes_[leaf_for(row)].weight; }

private:
    std::vector<TreeNode> nodes_;
};

struct BoostedModel {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    double learning_rate = 0.3;
    std::vector<std::string> feature_codes;
    HyperParams hyperparams;
    std::uint64_t seed = 0;
};

struct Gradients {
    std::vector<double> g;
    std::vector<double> h;
};

// Squared loss 0.5 * (y - yhat)^2: g = yhat - y, h = 1.
Gradients compute_gradients(std::span<const double> y, std::span<const double> yhat);

double soft_threshold(double g, double alpha);

// Minimizer of G w + 0.5 (H + lambda) w^2 + alpha |w|.
double leaf_weight(double sum_g, double sum_h, double lambda, double alpha);

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda, double gamma);

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    double gain = 0.0;
};

// Exact greedy search over the given features for the rows of one node.
// Returns the (feature, threshold, default direction) with the largest
// positive gain whose children both reach min_child_weight. Ties go to the
// lowest feature index, then the lowest threshold, then default-left.
std::optional<SplitChoice> find_best_split(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                           std::span<const double> g, std::span<const double> h,
                                           std::span<const std::size_t> features, const HyperParams& params);

// Grows one tree level by level on rows. Column subsets are drawn per tree and
// then per level from rng; row subsampling is the caller's job (see fit).
RegressionTree grow_tree(const FeatureMatrix& x, std::span<const std::size_t> rows, std::span<const double> g,
                         std::span<const double> h, const HyperParams& params, Rng& rng);

BoostedModel fit(const FeatureMatrix& x, std::span<const double> y, std::vector<std::string> feature_codes,
                 const HyperParams& params, std::uint64_t seed);
BoostedModel fit(const CountryPanel& panel, const HyperParams& params, std::uint64_t seed);

// base_score + sum_t learning_rate * tree_t(row).
double predict(const BoostedModel& model, std::span<const double> row);
std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& x);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const BoostedModel& model);
// Throws ModelFormatError on malformed input or a version mismatch.
BoostedModel deserialize_model(const std::string& text);

} // namespace panelcast
