#pragma once

#include <string>
#include <vector>

#include "seepline/monitoring.hpp"
#include "seepline/random_forest.hpp"
#include "seepline/sobol.hpp"

namespace seepline {

struct ImputeReport {
    MonitoringSeries series;
    RandomForest model;
    Eigen::Index filled = 0;               // cells rewritten
    std::vector<std::int64_t> filled_rows;  // frame indices that were rewritten
};

/// Fill missing/abnormal cells of `target` with forest predictions from the
/// predictor channels. Fits on rows where target and all predictors are
/// clean; needs at least 50 such rows. Rows where a predictor itself is
/// unusable at a target gap abort the call with the offending row list.
ImputeReport ni_impute(const MonitoringSeries& series, const std::string& target,
                       const std::vector<std::string>& predictors, const RfHyperparams& hp);

/// Observed per-feature [min, max] over clean cells, for Sobol bounds.
std::vector<std::pair<double, double>> observed_bounds(const MonitoringSeries& series,
                                                       const std::vector<std::string>& channels);

}  // namespace seepline
