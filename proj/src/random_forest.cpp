#include "seepline/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seepline/errors.hpp"
#include "seepline/rng.hpp"

namespace seepline {

double RegressionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
        i = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = 0;  // variance reduction, weighted by node share of all rows
    std::vector<Eigen::Index> left, right;
};

double sum_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
    double s = 0;
    for (Eigen::Index i : idx) s += y(i);
    return s;
}

double sq_sum_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
    double s = 0;
    for (Eigen::Index i : idx) s += y(i) * y(i);
    return s;
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RfHyperparams& hp,
                int feature_subset, Rng& rng, Eigen::VectorXd& importance_acc)
        : X_(X), y_(y), hp_(hp), subset_(feature_subset), rng_(rng), imp_(importance_acc) {}

    RegressionTree build(std::vector<Eigen::Index> rows) {
        total_rows_ = static_cast<double>(rows.size());
        RegressionTree t;
        grow(t, std::move(rows), 0);
        return t;
    }

private:
    int grow(RegressionTree& t, std::vector<Eigen::Index> rows, int depth) {
        const int me = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        const double n = static_cast<double>(rows.size());
        const double mean = sum_of(y_, rows) / n;
        t.nodes[static_cast<std::size_t>(me)].value = mean;

        if (depth >= hp_.max_depth ||
            rows.size() < 2 * static_cast<std::size_t>(hp_.min_samples_leaf))
            return me;

        Split best = best_split(rows);
        if (best.feature < 0) return me;

        imp_(best.feature) += best.gain;
        // Children are grown after the node is finalized; store indices last
        // because grow() reallocates t.nodes.
        const int l = grow(t, std::move(best.left), depth + 1);
        const int r = grow(t, std::move(best.right), depth + 1);
        t.nodes[static_cast<std::size_t>(me)].feature = best.feature;
        t.nodes[static_cast<std::size_t>(me)].threshold = best.threshold;
        t.nodes[static_cast<std::size_t>(me)].left = l;
        t.nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }

    Split best_split(const std::vector<Eigen::Index>& rows) {
        const Eigen::Index d = X_.cols();
        // Feature subset drawn without replacement, Fisher-Yates prefix.
        std::vector<int> feats(static_cast<std::size_t>(d));
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < subset_; ++i) {
            const auto j = static_cast<std::size_t>(i) +
                           static_cast<std::size_t>(rng_.uniform_int(
                               static_cast<std::uint64_t>(d - i)));
            std::swap(feats[static_cast<std::size_t>(i)], feats[j]);
        }

        const double n = static_cast<double>(rows.size());
        const double total_sum = sum_of(y_, rows);
        const double total_sq = sq_sum_of(y_, rows);
        const double node_var = total_sq / n - (total_sum / n) * (total_sum / n);
        if (node_var <= 0) return {};

        Split best;
        std::vector<std::pair<double, Eigen::Index>> order(rows.size());
        for (int fi = 0; fi < subset_; ++fi) {
            const int f = feats[static_cast<std::size_t>(fi)];
            for (std::size_t k = 0; k < rows.size(); ++k)
                order[k] = {X_(rows[k], f), rows[k]};
            std::sort(order.begin(), order.end());

            double left_sum = 0, left_sq = 0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                const double yv = y_(order[k].second);
                left_sum += yv;
                left_sq += yv * yv;
                if (order[k].first == order[k + 1].first) continue;  // no boundary here
                const double nl = static_cast<double>(k + 1);
                const double nr = n - nl;
                if (nl < hp_.min_samples_leaf || nr < hp_.min_samples_leaf) continue;
                const double right_sum = total_sum - left_sum;
                const double right_sq = total_sq - left_sq;
                const double var_l = left_sq / nl - (left_sum / nl) * (left_sum / nl);
                const double var_r = right_sq / nr - (right_sum / nr) * (right_sum / nr);
                const double gain = (n / total_rows_) * (node_var - (nl / n) * var_l - (nr / n) * var_r);
                if (gain > best.gain) {
                    best.feature = f;
                    best.threshold = 0.5 * (order[k].first + order[k + 1].first);
                    best.gain = gain;
                    best.left.clear();
                    best.right.clear();
                    for (std::size_t m = 0; m < order.size(); ++m)
                        (m <= k ? best.left : best.right).push_back(order[m].second);
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    const RfHyperparams& hp_;
    int subset_;
    Rng& rng_;
    Eigen::VectorXd& imp_;
    double total_rows_ = 1;
};

}  // namespace

RandomForest rf_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const RfHyperparams& hp) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n == 0 || d == 0) throw InsufficientDataError("empty training data");
    if (n != y.size()) throw SchemaError("feature rows and target length differ");
    if (hp.trees < 1 || hp.max_depth < 1 || hp.min_samples_leaf < 1)
        throw ConfigError("forest hyperparameters must be positive");
    if (n < 2 * hp.min_samples_leaf)
        throw InsufficientDataError("need at least " + std::to_string(2 * hp.min_samples_leaf) +
                                    " rows, got " + std::to_string(n));
    if (!X.allFinite() || !y.allFinite()) throw SchemaError("non-finite training data");

    // Canonical row order (lexicographic over features, then target) makes the
    // fit independent of how callers happened to order their rows.
    std::vector<Eigen::Index> canon(static_cast<std::size_t>(n));
    std::iota(canon.begin(), canon.end(), 0);
    std::sort(canon.begin(), canon.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < d; ++c) {
            if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
        }
        return y(a) < y(b);
    });
    Eigen::MatrixXd Xc(n, d);
    Eigen::VectorXd yc(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Xc.row(i) = X.row(canon[static_cast<std::size_t>(i)]);
        yc(i) = y(canon[static_cast<std::size_t>(i)]);
    }

    RandomForest model;
    model.hp = hp;
    model.n_features = d;
    model.importances = Eigen::VectorXd::Zero(d);
    const int subset = hp.feature_subset > 0
                           ? std::min<int>(hp.feature_subset, static_cast<int>(d))
                           : static_cast<int>((d + 2) / 3);

    for (int t = 0; t < hp.trees; ++t) {
        Rng rng = Rng::substream(hp.seed, "tree", static_cast<std::uint64_t>(t));
        std::vector<Eigen::Index> sample(static_cast<std::size_t>(n));
        for (auto& s : sample)
            s = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        std::sort(sample.begin(), sample.end());
        TreeBuilder builder(Xc, yc, hp, subset, rng, model.importances);
        model.trees.push_back(builder.build(std::move(sample)));
    }

    const double total = model.importances.sum();
    if (total > 0) model.importances /= total;
    return model;
}

double rf_predict(const RandomForest& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.n_features)
        throw SchemaError("feature vector length " + std::to_string(x.size()) +
                          " does not match training width " + std::to_string(model.n_features));
    if (model.trees.empty()) throw InsufficientDataError("forest has no trees");
    double sum = 0;
    for (const auto& t : model.trees) sum += t.predict(x);
    return sum / static_cast<double>(model.trees.size());
}

nlohmann::json RandomForest::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["n_features"] = n_features;
    j["hyperparameters"] = {{"trees", hp.trees},
                            {"max_depth", hp.max_depth},
                            {"min_samples_leaf", hp.min_samples_leaf},
                            {"feature_subset", hp.feature_subset},
                            {"seed", hp.seed}};
    j["importances"] =
        std::vector<double>(importances.data(), importances.data() + importances.size());
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& nd : t.nodes)
            nodes.push_back({{"f", nd.feature},
                             {"t", nd.threshold},
                             {"v", nd.value},
                             {"l", nd.left},
                             {"r", nd.right}});
        arr.push_back(std::move(nodes));
    }
    j["trees"] = std::move(arr);
    return j;
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
    RandomForest m;
    m.n_features = j.at("n_features").get<Eigen::Index>();
    const auto& h = j.at("hyperparameters");
    m.hp.trees = h.at("trees").get<int>();
    m.hp.max_depth = h.at("max_depth").get<int>();
    m.hp.min_samples_leaf = h.at("min_samples_leaf").get<int>();
    m.hp.feature_subset = h.at("feature_subset").get<int>();
    m.hp.seed = h.at("seed").get<std::uint64_t>();
    auto imp = j.at("importances").get<std::vector<double>>();
    m.importances =
        Eigen::Map<const Eigen::VectorXd>(imp.data(), static_cast<Eigen::Index>(imp.size()));
    for (const auto& tj : j.at("trees")) {
        RegressionTree t;
        for (const auto& nj : tj) {
            TreeNode nd;
            nd.feature = nj.at("f").get<int>();
            nd.threshold = nj.at("t").get<double>();
            nd.value = nj.at("v").get<double>();
            nd.left = nj.at("l").get<int>();
            nd.right = nj.at("r").get<int>();
            t.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

}  // namespace seepline
