#include "panelcast/gbtree.hpp"

#include "panelcast/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace panelcast {

namespace {

void require(bool ok, const char* field, double value, const char* range) {
    if (!ok) throw ParameterError(fmt::format("hyperparameter {} = {} is outside {}", field, value, range));
}

} // namespace

void HyperParams::validate() const {
    require(n_estimators >= 0, "n_estimators", n_estimators, "[0, inf)");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate", learning_rate, "(0, 1]");
    require(max_depth >= 0, "max_depth", max_depth, "[0, inf)");
    require(min_child_weight >= 0.0, "min_child_weight", min_child_weight, "[0, inf)");
    require(gamma >= 0.0, "gamma", gamma, "[0, inf)");
    require(subsample > 0.0 && subsample <= 1.0, "subsample", subsample, "(0, 1]");
    require(colsample_bytree > 0.0 && colsample_bytree <= 1.0, "colsample_bytree", colsample_bytree, "(0, 1]");
    require(colsample_bylevel > 0.0 && colsample_bylevel <= 1.0, "colsample_bylevel", colsample_bylevel, "(0, 1]");
    require(lambda >= 0.0, "lambda", lambda, "[0, inf)");
    require(alpha >= 0.0, "alpha", alpha, "[0, inf)");
    require(scale_pos_weight > 0.0, "scale_pos_weight", scale_pos_weight, "(0, inf)");
}

nlohmann::json to_json(const HyperParams& p) {
    return {{"n_estimators", p.n_estimators},
            {"learning_rate", p.learning_rate},
            {"max_depth", p.max_depth},
            {"min_child_weight", p.min_child_weight},
            {"gamma", p.gamma},
            {"subsample", p.subsample},
            {"colsample_bytree", p.colsample_bytree},
            {"colsample_bylevel", p.colsample_bylevel},
            {"lambda", p.lambda},
            {"alpha", p.alpha},
            {"scale_pos_weight", p.scale_pos_weight}};
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("hyperparameters must be a JSON object");
    HyperParams p;
    auto real = [&](const char* key, double& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw ParameterError(fmt::format("hyperparameter {} must be a number", key));
        field = j[key].get<double>();
    };
    auto integer = [&](const char* key, int& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) throw ParameterError(fmt::format("hyperparameter {} must be an integer", key));
        field = j[key].get<int>();
    };
    static const char* known[] = {"n_estimators", "learning_rate", "max_depth", "min_child_weight",
                                  "gamma", "subsample", "colsample_bytree", "colsample_bylevel",
                                  "lambda", "alpha", "scale_pos_weight"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
            throw ParameterError(fmt::format("unknown hyperparameter '{}'", key));
    }
    integer("n_estimators", p.n_estimators);
    real("learning_rate", p.learning_rate);
    integer("max_depth", p.max_depth);
    real("min_child_weight", p.min_child_weight);
    real("gamma", p.gamma);
    real("subsample", p.subsample);
    real("colsample_bytree", p.colsample_bytree);
    real("colsample_bylevel", p.colsample_bylevel);
    real("lambda", p.lambda);
    real("alpha", p.alpha);
    real("scale_pos_weight", p.scale_pos_weight);
    p.validate();
    return p;
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw ParameterError("a tree needs at least one node");
}

std::size_t RegressionTree::num_leaves() const {
    std::size_t n = 0;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const auto& node = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (node.is_leaf()) {
            ++n;
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    return n;
}

std::size_t RegressionTree::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        const auto& node = nodes_[static_cast<std::size_t>(id)];
        best = std::max(best, d);
        if (!node.is_leaf()) {
            stack.emplace_back(node.left, d + 1);
            stack.emplace_back(node.right, d + 1);
        }
    }
    return best;
}

std::size_t RegressionTree::leaf_for(std::span<const double> row) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const auto& node = nodes_[id];
        const double v = row[static_cast<std::size_t>(node.feature)];
        const bool go_left = is_missing(v) ? node.default_left : v < node.threshold;
        id = static_cast<std::size_t>(go_left ? node.left : node.right);
    }
    return id;
}

Gradients compute_gradients(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size())
        throw ParameterError(fmt::format("gradient inputs differ in length: {} vs {}", y.size(), yhat.size()));
    if (y.empty()) throw ParameterError("gradient inputs are empty");
    Gradients out{std::vector<double>(y.size()), std::vector<double>(y.size(), 1.0)};
    for (std::size_t i = 0; i < y.size(); ++i) out.g[i] = yhat[i] - y[i];
    return out;
}

double soft_threshold(double g, double alpha) {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

double leaf_weight(double sum_g, double sum_h, double lambda, double alpha) {
    if (!(sum_h + lambda > 0.0))
        throw ParameterError(fmt::format("leaf weight needs H + lambda > 0, got {} + {}", sum_h, lambda));
    return -soft_threshold(sum_g, alpha) / (sum_h + lambda);
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda, double gamma) {
    if (!(h_left + lambda > 0.0) || !(h_right + lambda > 0.0))
        throw ParameterError("split gain needs H + lambda > 0 on both sides");
    const double gl = g_left * g_left / (h_left + lambda);
    const double gr = g_right * g_right / (h_right + lambda);
    const double g = g_left + g_right;
    const double parent = g * g / (h_left + h_right + lambda);
    return 0.5 * (gl + gr - parent) - gamma;
}

std::optional<SplitChoice> find_best_split(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                           std::span<const double> g, std::span<const double> h,
                                           std::span<const std::size_t> features, const HyperParams& params) {
    struct Entry {
        double value;
        double g;
        double h;
    };

    std::optional<SplitChoice> best;
    double best_gain = 0.0;
    std::vector<Entry> present;
    present.reserve(rows.size());
    std::vector<double> suffix_g;
    std::vector<double> suffix_h;

    for (std::size_t f : features) {
        present.clear();
        double g_miss = 0.0;
        double h_miss = 0.0;
        for (std::size_t r : rows) {
            const double v = x(r, f);
            if (is_missing(v)) {
                g_miss += g[r];
                h_miss += h[r];
            } else {
                present.push_back({v, g[r], h[r]});
            }
        }
        if (present.size() < 2) continue;
        std::stable_sort(present.begin(), present.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

        // Suffix sums are accumulated directly rather than as total - prefix,
        // which can drift below min_child_weight by an ulp.
        suffix_g.assign(present.size() + 1, 0.0);
        suffix_h.assign(present.size() + 1, 0.0);
        for (std::size_t i = present.size(); i-- > 0;) {
            suffix_g[i] = suffix_g[i + 1] + present[i].g;
            suffix_h[i] = suffix_h[i + 1] + present[i].h;
        }

        double g_prefix = 0.0;
        double h_prefix = 0.0;
        for (std::size_t i = 0; i + 1 < present.size(); ++i) {
            g_prefix += present[i].g;
            h_prefix += present[i].h;
            const double lo = present[i].value;
            const double hi = present[i + 1].value;
            if (!(lo < hi)) continue;
            double threshold = lo + (hi - lo) / 2.0;
            if (!(threshold > lo)) threshold = hi;

            const double g_suffix = suffix_g[i + 1];
            const double h_suffix = suffix_h[i + 1];
            for (bool default_left : {true, false}) {
                const double gl = default_left ? g_prefix + g_miss : g_prefix;
                const double hl = default_left ? h_prefix + h_miss : h_prefix;
                const double gr = default_left ? g_suffix : g_suffix + g_miss;
                const double hr = default_left ? h_suffix : h_suffix + h_miss;
                if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
                if (!(hl + params.lambda > 0.0) || !(hr + params.lambda > 0.0)) continue;
                const double gain = split_gain(gl, hl, gr, hr, params.lambda, params.gamma);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = SplitChoice{static_cast<int>(f), threshold, default_left, gain};
                }
            }
        }
    }
    return best;
}

RegressionTree grow_tree(const FeatureMatrix& x, std::span<const std::size_t> rows, std::span<const double> g,
                         std::span<const double> h, const HyperParams& params, Rng& rng) {
    if (rows.empty()) throw ParameterError("grow_tree needs at least one row");

    std::vector<std::size_t> tree_features = sample_indices(x.cols(), params.colsample_bytree, rng);

    struct Pending {
        int node;
        std::vector<std::size_t> rows;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Pending> level{{0, std::vector<std::size_t>(rows.begin(), rows.end())}};

    for (int depth = 0; !level.empty(); ++depth) {
        std::vector<std::size_t> level_features;
        if (depth < params.max_depth) {
            for (std::size_t i : sample_indices(tree_features.size(), params.colsample_bylevel, rng))
                level_features.push_back(tree_features[i]);
        }

        std::vector<Pending> next;
        for (auto& item : level) {
            std::optional<SplitChoice> split;
            if (depth < params.max_depth) split = find_best_split(x, item.rows, g, h, level_features, params);

            if (!split) {
                double sg = 0.0;
                double sh = 0.0;
                for (std::size_t r : item.rows) {
                    sg += g[r];
                    sh += h[r];
                }
                nodes[static_cast<std::size_t>(item.node)].weight = leaf_weight(sg, sh, params.lambda, params.alpha);
                continue;
            }

            Pending left{static_cast<int>(nodes.size()), {}};
            Pending right{static_cast<int>(nodes.size() + 1), {}};
            for (std::size_t r : item.rows) {
                const double v = x(r, static_cast<std::size_t>(split->feature));
                const bool go_left = is_missing(v) ? split->default_left : v < split->threshold;
                (go_left ? left : right).rows.push_back(r);
            }
            auto& node = nodes[static_cast<std::size_t>(item.node)];
            node.feature = split->feature;
            node.threshold = split->threshold;
            node.default_left = split->default_left;
            node.gain = split->gain;
            node.left = left.node;
            node.right = right.node;
            nodes.emplace_back();
            nodes.emplace_back();
            next.push_back(std::move(left));
            next.push_back(std::move(right));
        }
        level = std::move(next);
    }
    return RegressionTree(std::move(nodes));
}

BoostedModel fit(const FeatureMatrix& x, std::span<const double> y, std::vector<std::string> feature_codes,
                 const HyperParams& params, std::uint64_t seed) {
    params.validate();
    if (y.size() < 2) throw DataError(fmt::format("fit needs at least 2 training rows, got {}", y.size()));
    if (x.rows() != y.size())
        throw ParameterError(fmt::format("feature rows ({}) and targets ({}) differ", x.rows(), y.size()));
    if (feature_codes.size() != x.cols())
        throw ParameterError(fmt::format("{} feature codes for {} columns", feature_codes.size(), x.cols()));
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("training targets must be finite");
    if (params.scale_pos_weight != 1.0)
        std::clog << "warning: scale_pos_weight = " << params.scale_pos_weight << " is ignored for regression\n";

    BoostedModel model;
    model.learning_rate = params.learning_rate;
    model.feature_codes = std::move(feature_codes);
    model.hyperparams = params;
    model.seed = seed;
    model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    Rng rng(seed);
    std::vector<double> yhat(y.size(), model.base_score);
    model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
    for (int t = 0; t < params.n_estimators; ++t) {
        const auto grad = compute_gradients(y, yhat);
        const auto rows = sample_indices(y.size(), params.subsample, rng);
        auto tree = grow_tree(x, rows, grad.g, grad.h, params, rng);
        for (std::size_t i = 0; i < y.size(); ++i) yhat[i] += model.learning_rate * tree.predict(x.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

BoostedModel fit(const CountryPanel& panel, const HyperParams& params, std::uint64_t seed) {
    if (panel.rows() == 0) throw DataError(fmt::format("{}: empty panel", panel.country));
    return fit(panel.features, panel.target, panel.feature_codes, params, seed);
}

double predict(const BoostedModel& model, std::span<const double> row) {
    if (row.size() != model.feature_codes.size())
        throw ParameterError(fmt::format("row has {} features, model expects {}", row.size(), model.feature_codes.size()));
    double out = model.base_score;
    for (const auto& tree : model.trees) out += model.learning_rate * tree.predict(row);
    return out;
}

std::vector<double> predict(const BoostedModel& model, const FeatureMatrix& x) {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(model, x.row(r));
    return out;
}

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int id) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) return {{"leaf", n.weight}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"default_left", n.default_left},
            {"gain", n.gain},
            {"left", node_to_json(nodes, n.left)},
            {"right", node_to_json(nodes, n.right)}};
}

template <class T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ModelFormatError(fmt::format("model document: missing field '{}'", key));
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ModelFormatError(fmt::format("model document: field '{}' has the wrong type", key));
    }
}

double finite_field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
        throw ModelFormatError(fmt::format("model document: field '{}' must be a number", key));
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw ModelFormatError(fmt::format("model document: field '{}' is not finite", key));
    return v;
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes, std::size_t n_features, std::size_t depth) {
    if (depth > 64) throw ModelFormatError("model document: tree deeper than 64 levels");
    if (!j.is_object()) throw ModelFormatError("model document: tree node must be an object");
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("leaf")) {
        nodes[static_cast<std::size_t>(id)].weight = finite_field(j, "leaf");
        return id;
    }
    TreeNode n;
    if (!j.contains("feature") || !j.at("feature").is_number_integer())
        throw ModelFormatError("model document: node 'feature' must be an integer");
    n.feature = j.at("feature").get<int>();
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features)
        throw ModelFormatError(fmt::format("model document: feature index {} out of range", n.feature));
    n.threshold = finite_field(j, "threshold");
    n.default_left = field<bool>(j, "default_left");
    n.gain = finite_field(j, "gain");
    n.left = node_from_json(field<nlohmann::json>(j, "left"), nodes, n_features, depth + 1);
    n.right = node_from_json(field<nlohmann::json>(j, "right"), nodes, n_features, depth + 1);
    nodes[static_cast<std::size_t>(id)] = n;
    return id;
}

} // namespace

std::string serialize_model(const BoostedModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) trees.push_back(node_to_json(t.nodes(), 0));
    const nlohmann::json doc = {{"format", "panelcast-gbtree"},
                                {"version", kModelFormatVersion},
                                {"base_score", model.base_score},
                                {"learning_rate", model.learning_rate},
                                {"feature_codes", model.feature_codes},
                                {"hyperparams", to_json(model.hyperparams)},
                                {"seed", model.seed},
                                {"trees", std::move(trees)}};
    return doc.dump(1) + "\n";
}

BoostedModel deserialize_model(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelFormatError(fmt::format("model document: parse error: {}", e.what()));
    }
    if (!doc.is_object()) throw ModelFormatError("model document: top level must be an object");
    if (field<std::string>(doc, "format") != "panelcast-gbtree") throw ModelFormatError("model document: unknown format");
    const auto version = field<int>(doc, "version");
    if (version != kModelFormatVersion)
        throw ModelFormatError(fmt::format("model document: version {} not supported (expected {})", version, kModelFormatVersion));

    BoostedModel model;
    model.base_score = finite_field(doc, "base_score");
    model.learning_rate = finite_field(doc, "learning_rate");
    model.feature_codes = field<std::vector<std::string>>(doc, "feature_codes");
    if (!doc.contains("seed") || !doc.at("seed").is_number_unsigned())
        throw ModelFormatError("model document: 'seed' must be an unsigned integer");
    model.seed = doc.at("seed").get<std::uint64_t>();
    try {
        model.hyperparams = hyperparams_from_json(field<nlohmann::json>(doc, "hyperparams"));
    } catch (const ParameterError& e) {
        throw ModelFormatError(fmt::format("model document: {}", e.what()));
    }
    const auto trees = field<nlohmann::json>(doc, "trees");
    if (!trees.is_array()) throw ModelFormatError("model document: 'trees' must be an array");
    for (const auto& t : trees) {
        std::vector<TreeNode> nodes;
        node_from_json(t, nodes, model.feature_codes.size(), 0);
        model.trees.emplace_back(std::move(nodes));
    }
    return model;
}

} // namespace panelcast
