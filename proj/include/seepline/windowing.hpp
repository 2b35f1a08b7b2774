#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"

namespace seepline {

/// Chronological window split, indices [0,train_end) / [train_end,val_end) /
/// [val_end,total). Never shuffled.
struct SplitRanges {
    Eigen::Index train_end = 0;
    Eigen::Index val_end = 0;
    Eigen::Index total = 0;

    Eigen::Index train_count() const { return train_end; }
    Eigen::Index val_count() const { return val_end - train_end; }
    Eigen::Index test_count() const { return total - val_end; }
};

/// 70/10/20 split; fractions rounded half-up, remainder goes to test.
SplitRanges chrono_split(Eigen::Index total);

/// Supervised next-step pairs: each row of `inputs` is a window of
/// `window_len` consecutive clean values, `targets` the value that follows.
struct ForecastDataset {
    std::string channel;
    Eigen::Index window_len = 0;
    Eigen::MatrixXd inputs;                   // windows x window_len
    Eigen::VectorXd targets;                  // windows
    std::vector<Eigen::Index> start_frames;   // frame index of each window start
    SplitRanges split;

    Eigen::Index count() const { return inputs.rows(); }
};

/// Slide a length-L window over the channel; windows spanning any
/// missing/abnormal cell (including the target cell) are skipped.
ForecastDataset make_windows(const MonitoringSeries& series, Eigen::Index window_len,
                             const std::string& channel);

nlohmann::json dataset_manifest(const ForecastDataset& ds, const NormalizationStats& stats,
                                const std::string& source_digest);

}  // namespace seepline
