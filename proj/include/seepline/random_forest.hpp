#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace seepline {

struct RfHyperparams {
    int trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 2;
    int feature_subset = 0;  // 0 means ceil(d/3), resolved at fit time
    std::uint64_t seed = 0;
};

/// Flat node storage; children index into the same vector, -1 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    double value = 0;  // leaf mean
    int left = -1;
    int right = -1;

    bool is_leaf() const { return left < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct RandomForest {
    std::vector<RegressionTree> trees;
    Eigen::VectorXd importances;  // per feature, sums to 1 (all zero if no splits)
    RfHyperparams hp;
    Eigen::Index n_features = 0;

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);
};

/// Bootstrap-sampled variance-reduction forest. Rows are first put into a
/// canonical order so the fit is invariant under input row permutation.
RandomForest rf_fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const RfHyperparams& hp);

/// Mean of per-tree leaf values.
double rf_predict(const RandomForest& model, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace seepline
