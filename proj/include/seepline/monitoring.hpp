#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seepline {

enum class CellFlag : std::uint8_t { observed = 0, missing = 1, abnormal = 2, imputed = 3 };

const char* flag_name(CellFlag f);

/// One timestamped multichannel record. A cell flagged `missing` carries no
/// numeric payload (stored as NaN); every other flag carries a finite value.
struct MonitoringFrame {
    std::int64_t timestamp = 0;
    Eigen::VectorXd values;
    std::vector<CellFlag> quality;
};

/// A column-oriented sequence of frames sharing one channel list.
/// Timestamps are strictly increasing; rows are frames, columns are channels.
class MonitoringSeries {
public:
    MonitoringSeries() = default;
    explicit MonitoringSeries(std::vector<std::string> channel_ids);

    Eigen::Index rows() const { return timestamps_.size(); }
    Eigen::Index channels() const { return static_cast<Eigen::Index>(channel_ids_.size()); }

    const std::vector<std::string>& channel_ids() const { return channel_ids_; }
    Eigen::Index channel_index(const std::string& id) const;  // throws SchemaError

    const Eigen::VectorX<std::int64_t>& timestamps() const { return timestamps_; }
    const Eigen::MatrixXd& values() const { return values_; }
    Eigen::MatrixXd& values() { return values_; }

    CellFlag flag(Eigen::Index row, Eigen::Index col) const {
        return static_cast<CellFlag>(flags_(row, col));
    }
    void set_flag(Eigen::Index row, Eigen::Index col, CellFlag f) {
        flags_(row, col) = static_cast<std::uint8_t>(f);
    }
    void set_value(Eigen::Index row, Eigen::Index col, double v, CellFlag f);
    void set_missing(Eigen::Index row, Eigen::Index col);

    /// observed or imputed, i.e. usable for fitting and windowing.
    bool clean(Eigen::Index row, Eigen::Index col) const {
        auto f = flag(row, col);
        return f == CellFlag::observed || f == CellFlag::imputed;
    }

    void append(const MonitoringFrame& frame);  // validates ordering and width
    MonitoringFrame frame(Eigen::Index row) const;

    /// Column of channel values with missing/abnormal cells as NaN unless
    /// include_abnormal, in which case abnormal payloads are kept.
    Eigen::VectorXd channel_values(Eigen::Index col, bool include_abnormal = false) const;

private:
    std::vector<std::string> channel_ids_;
    Eigen::VectorX<std::int64_t> timestamps_;
    Eigen::MatrixXd values_;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> flags_;
};

/// Read `timestamp,<channel>,...` CSV. Header must name exactly the given
/// schema (in order). Empty or unparseable numeric cells become `missing`.
MonitoringSeries ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& schema);

/// Schema taken from the header row.
MonitoringSeries ingest_csv(const std::filesystem::path& path);

std::string to_csv(const MonitoringSeries& series);
void write_csv(const MonitoringSeries& series, const std::filesystem::path& path);

/// Re-flag observed cells outside median +/- k*MAD of their channel as
/// abnormal. Channel statistics are computed over all numeric payloads
/// (observed and abnormal alike) so repeated application is a fixed point.
/// Channels with fewer than 3 numeric cells pass through untouched.
MonitoringSeries flag_abnormal(const MonitoringSeries& series, double k = 6.0);

}  // namespace seepline
