#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "seepline/random_forest.hpp"

namespace seepline {

struct SobolResult {
    Eigen::VectorXd s1;  // first-order index per feature
    Eigen::VectorXd st;  // total-order index per feature
    Eigen::Index samples = 0;
    std::uint64_t seed = 0;
};

using ModelFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Saltelli pick-freeze estimate over uniform samples in the given bounds,
/// using 2N base samples plus N per feature.
SobolResult sobol_indices(const ModelFn& model,
                          const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                          std::uint64_t seed);

SobolResult sobol_indices(const RandomForest& model,
                          const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                          std::uint64_t seed);

}  // namespace seepline
