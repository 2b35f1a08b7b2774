#include "seepline/windowing.hpp"

#include <cmath>

#include "seepline/errors.hpp"

namespace seepline {

SplitRanges chrono_split(Eigen::Index total) {
    SplitRanges s;
    s.total = total;
    s.train_end = static_cast<Eigen::Index>(std::floor(0.7 * static_cast<double>(total) + 0.5));
    const Eigen::Index val = static_cast<Eigen::Index>(std::floor(0.1 * static_cast<double>(total) + 0.5));
    s.val_end = std::min(s.train_end + val, total);
    return s;
}

ForecastDataset make_windows(const MonitoringSeries& series, Eigen::Index window_len,
                             const std::string& channel) {
    if (window_len <= 0) throw ConfigError("window length must be positive");
    const Eigen::Index c = series.channel_index(channel);
    const Eigen::Index n = series.rows();

    // clean_run[r] = number of consecutive clean cells starting at r.
    std::vector<Eigen::Index> clean_run(static_cast<std::size_t>(n) + 1, 0);
    for (Eigen::Index r = n - 1; r >= 0; --r)
        clean_run[static_cast<std::size_t>(r)] =
            series.clean(r, c) ? clean_run[static_cast<std::size_t>(r) + 1] + 1 : 0;

    std::vector<Eigen::Index> starts;
    for (Eigen::Index r = 0; r + window_len < n; ++r)
        if (clean_run[static_cast<std::size_t>(r)] >= window_len + 1) starts.push_back(r);

    if (starts.empty())
        throw InsufficientDataError("fewer than window_len+1 consecutive clean frames in channel " +
                                    channel);

    ForecastDataset ds;
    ds.channel = channel;
    ds.window_len = window_len;
    ds.inputs.resize(static_cast<Eigen::Index>(starts.size()), window_len);
    ds.targets.resize(static_cast<Eigen::Index>(starts.size()));
    ds.start_frames = starts;
    for (std::size_t w = 0; w < starts.size(); ++w) {
        const Eigen::Index r0 = starts[w];
        for (Eigen::Index j = 0; j < window_len; ++j)
            ds.inputs(static_cast<Eigen::Index>(w), j) = series.values()(r0 + j, c);
        ds.targets(static_cast<Eigen::Index>(w)) = series.values()(r0 + window_len, c);
    }
    ds.split = chrono_split(ds.count());
    return ds;
}

nlohmann::json dataset_manifest(const ForecastDataset& ds, const NormalizationStats& stats,
                                const std::string& source_digest) {
    nlohmann::json j;
    j["version"] = 1;
    j["channel"] = ds.channel;
    j["window_len"] = ds.window_len;
    j["windows"] = ds.count();
    j["split"] = {{"train_end", ds.split.train_end}, {"val_end", ds.split.val_end},
                  {"total", ds.split.total}};
    j["normalization"] = stats.to_json();
    j["source_digest"] = source_digest;
    return j;
}

}  // namespace seepline
