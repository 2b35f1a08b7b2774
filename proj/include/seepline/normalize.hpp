#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/monitoring.hpp"

namespace seepline {

/// Frame index range [begin, end).
struct FrameRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    Eigen::Index size() const { return end - begin; }
};

/// Per-channel mean and population standard deviation (divisor n, sigma > 0).
struct NormalizationStats {
    std::vector<std::string> channel_ids;
    Eigen::VectorXd mean;
    Eigen::VectorXd sigma;

    double normalize(Eigen::Index channel, double x) const {
        return (x - mean(channel)) / sigma(channel);
    }
    double denormalize(Eigen::Index channel, double z) const {
        return z * sigma(channel) + mean(channel);
    }

    nlohmann::json to_json() const;
    static NormalizationStats from_json(const nlohmann::json& j);
};

/// Fit z-score statistics on the clean cells of the given frame range only.
/// Throws DegenerateChannelError when a channel is constant (sigma = 0) or
/// has no clean cell in range.
NormalizationStats zscore_fit(const MonitoringSeries& series, FrameRange train);

/// Replace every observed/imputed value by (x - mean)/sigma; flags preserved,
/// missing and abnormal cells untouched.
MonitoringSeries zscore_apply(const MonitoringSeries& series, const NormalizationStats& stats);

/// Inverse of zscore_apply.
MonitoringSeries zscore_invert(const MonitoringSeries& series, const NormalizationStats& stats);

}  // namespace seepline
