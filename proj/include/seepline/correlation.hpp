#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "seepline/monitoring.hpp"

namespace seepline {

/// Pearson correlation coefficient. Both series of equal length >= 2 and
/// non-constant, otherwise DegenerateVarianceError / SchemaError.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b);

struct CorrelationMatrix {
    std::vector<std::string> channel_ids;
    Eigen::MatrixXd coeff;  // symmetric, unit diagonal

    std::string to_csv() const;  // square labeled matrix for heat-map plotting
};

struct ScreenResult {
    std::vector<std::string> retained;
    CorrelationMatrix matrix;
};

/// Full pairwise matrix over rows where both channels are clean.
CorrelationMatrix correlation_matrix(const MonitoringSeries& series);

/// Greedily drops the later channel of any pair with |P| > threshold;
/// the full matrix is returned alongside for plotting.
ScreenResult correlation_screen(const MonitoringSeries& series, double threshold = 0.8);

}  // namespace seepline
