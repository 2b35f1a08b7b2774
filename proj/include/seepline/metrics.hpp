#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

namespace seepline {

/// Root mean square error.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& truth,
            const Eigen::Ref<const Eigen::VectorXd>& pred);

/// Mean absolute percentage error, in percent. Any |truth_i| <= 1e-8 raises
/// ZeroDenominatorError naming the offending index.
double mape(const Eigen::Ref<const Eigen::VectorXd>& truth,
            const Eigen::Ref<const Eigen::VectorXd>& pred);

/// Coefficient of determination; negative when predictions are worse than
/// the mean. Constant truth raises DegenerateVarianceError.
double r2(const Eigen::Ref<const Eigen::VectorXd>& truth,
          const Eigen::Ref<const Eigen::VectorXd>& pred);

struct EvalRow {
    std::string station;
    std::string model;
    double rmse = 0;
    double mape = 0;
    double r2 = 0;
    double runtime_seconds = 0;
    Eigen::Index n = 0;
    std::string error;  // non-empty when the entry failed; metrics then invalid

    bool failed() const { return !error.empty(); }
};

struct EvalReport {
    std::vector<EvalRow> rows;

    std::string to_csv() const;
    std::string to_markdown() const;
    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
};

}  // namespace seepline
