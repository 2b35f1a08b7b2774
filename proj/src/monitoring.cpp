#include "seepline/monitoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seepline/errors.hpp"
#include "seepline/io_util.hpp"

namespace seepline {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

const char* flag_name(CellFlag f) {
    switch (f) {
        case CellFlag::observed: return "observed";
        case CellFlag::missing: return "missing";
        case CellFlag::abnormal: return "abnormal";
        case CellFlag::imputed: return "imputed";
    }
    return "?";
}

MonitoringSeries::MonitoringSeries(std::vector<std::string> channel_ids)
    : channel_ids_(std::move(channel_ids)) {
    values_.resize(0, channels());
    flags_.resize(0, channels());
    timestamps_.resize(0);
}

Eigen::Index MonitoringSeries::channel_index(const std::string& id) const {
    for (Eigen::Index c = 0; c < channels(); ++c)
        if (channel_ids_[static_cast<std::size_t>(c)] == id) return c;
    throw SchemaError("unknown channel: " + id);
}

void MonitoringSeries::set_value(Eigen::Index row, Eigen::Index col, double v, CellFlag f) {
    if (f == CellFlag::missing) throw SchemaError("missing cells carry no value");
    values_(row, col) = v;
    set_flag(row, col, f);
}

void MonitoringSeries::set_missing(Eigen::Index row, Eigen::Index col) {
    values_(row, col) = kNaN;
    set_flag(row, col, CellFlag::missing);
}

void MonitoringSeries::append(const MonitoringFrame& frame) {
    if (frame.values.size() != channels() ||
        frame.quality.size() != static_cast<std::size_t>(channels()))
        throw SchemaError("frame width does not match channel list");
    if (rows() > 0 && frame.timestamp <= timestamps_(rows() - 1))
        throw OrderingError("timestamps must be strictly increasing (at row " +
                            std::to_string(rows()) + ")");
    for (Eigen::Index c = 0; c < channels(); ++c)
        if (frame.quality[static_cast<std::size_t>(c)] != CellFlag::missing &&
            !std::isfinite(frame.values(c)))
            throw SchemaError("non-finite value in non-missing cell");

    // All checks passed; only now mutate, so a rejected frame leaves no trace.
    const Eigen::Index r = rows();
    timestamps_.conservativeResize(r + 1);
    values_.conservativeResize(r + 1, channels());
    flags_.conservativeResize(r + 1, channels());
    timestamps_(r) = frame.timestamp;
    for (Eigen::Index c = 0; c < channels(); ++c) {
        const CellFlag f = frame.quality[static_cast<std::size_t>(c)];
        if (f == CellFlag::missing)
            set_missing(r, c);
        else
            set_value(r, c, frame.values(c), f);
    }
}

MonitoringFrame MonitoringSeries::frame(Eigen::Index row) const {
    MonitoringFrame f;
    f.timestamp = timestamps_(row);
    f.values = values_.row(row);
    f.quality.resize(static_cast<std::size_t>(channels()));
    for (Eigen::Index c = 0; c < channels(); ++c)
        f.quality[static_cast<std::size_t>(c)] = flag(row, c);
    return f;
}

Eigen::VectorXd MonitoringSeries::channel_values(Eigen::Index col, bool include_abnormal) const {
    Eigen::VectorXd out(rows());
    for (Eigen::Index r = 0; r < rows(); ++r) {
        const bool usable = clean(r, col) || (include_abnormal && flag(r, col) == CellFlag::abnormal);
        out(r) = usable ? values_(r, col) : kNaN;
    }
    return out;
}

MonitoringSeries ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty CSV: " + path.string());

    auto header = split(trim(line), ',');
    if (header.empty() || trim(header[0]) != "timestamp")
        throw SchemaError("first CSV column must be 'timestamp'");
    std::vector<std::string> ids;
    for (std::size_t i = 1; i < header.size(); ++i) ids.push_back(trim(header[i]));
    if (!schema.empty() && ids != schema) throw SchemaError("CSV header does not match schema");

    MonitoringSeries series(ids);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = trim(line);
        if (row.empty()) continue;
        auto cells = split(row, ',');
        if (cells.size() != ids.size() + 1)
            throw SchemaError("row " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(ids.size() + 1));
        MonitoringFrame f;
        if (!parse_timestamp(trim(cells[0]), f.timestamp))
            throw SchemaError("unparseable timestamp at row " + std::to_string(lineno));
        f.values.resize(static_cast<Eigen::Index>(ids.size()));
        f.quality.resize(ids.size());
        for (std::size_t c = 0; c < ids.size(); ++c) {
            const std::string cell = trim(cells[c + 1]);
            double v;
            if (!cell.empty() && parse_double(cell, v) && std::isfinite(v)) {
                f.values(static_cast<Eigen::Index>(c)) = v;
                f.quality[c] = CellFlag::observed;
            } else {
                f.values(static_cast<Eigen::Index>(c)) = kNaN;
                f.quality[c] = CellFlag::missing;
            }
        }
        series.append(f);
    }
    return series;
}

MonitoringSeries ingest_csv(const std::filesystem::path& path) { return ingest_csv(path, {}); }

std::string to_csv(const MonitoringSeries& series) {
    std::string out = "timestamp";
    for (const auto& id : series.channel_ids()) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (Eigen::Index r = 0; r < series.rows(); ++r) {
        out += std::to_string(series.timestamps()(r));
        for (Eigen::Index c = 0; c < series.channels(); ++c) {
            out += ',';
            if (series.flag(r, c) != CellFlag::missing) out += format_double(series.values()(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_csv(const MonitoringSeries& series, const std::filesystem::path& path) {
    atomic_write_file(path, to_csv(series));
}

MonitoringSeries flag_abnormal(const MonitoringSeries& series, double k) {
    if (k <= 0) throw ConfigError("abnormality factor k must be positive");
    MonitoringSeries out = series;
    for (Eigen::Index c = 0; c < out.channels(); ++c) {
        std::vector<double> numeric;
        numeric.reserve(static_cast<std::size_t>(out.rows()));
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            const CellFlag f = out.flag(r, c);
            if (f == CellFlag::observed || f == CellFlag::abnormal)
                numeric.push_back(out.values()(r, c));
        }
        if (numeric.empty())
            throw DegenerateChannelError("channel " + out.channel_ids()[static_cast<std::size_t>(c)] +
                                         " has no numeric cells");
        if (numeric.size() <= 2) continue;  // insufficient support

        const double med = median_of(numeric);
        std::vector<double> dev(numeric.size());
        for (std::size_t i = 0; i < numeric.size(); ++i) dev[i] = std::abs(numeric[i] - med);
        const double mad = median_of(std::move(dev));

        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            if (out.flag(r, c) != CellFlag::observed) continue;
            if (std::abs(out.values()(r, c) - med) > k * mad)
                out.set_flag(r, c, CellFlag::abnormal);
        }
    }
    return out;
}

}  // namespace seepline
