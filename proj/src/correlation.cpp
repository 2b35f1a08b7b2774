#include "seepline/correlation.hpp"

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/io_util.hpp"

namespace seepline {

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw SchemaError("pearson: length mismatch");
    const auto k = static_cast<double>(a.size());
    if (a.size() < 2) throw InsufficientDataError("pearson: need at least 2 samples");
    const double sum_a = a.sum(), sum_b = b.sum();
    const double var_a = k * a.squaredNorm() - sum_a * sum_a;
    const double var_b = k * b.squaredNorm() - sum_b * sum_b;
    if (!(var_a > 0) || !(var_b > 0)) throw DegenerateVarianceError("pearson: constant series");
    const double cov = k * a.dot(b) - sum_a * sum_b;
    return cov / (std::sqrt(var_a) * std::sqrt(var_b));
}

std::string CorrelationMatrix::to_csv() const {
    std::string out = "channel";
    for (const auto& id : channel_ids) out += ',' + id;
    out += '\n';
    for (Eigen::Index r = 0; r < coeff.rows(); ++r) {
        out += channel_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < coeff.cols(); ++c) out += ',' + format_double(coeff(r, c));
        out += '\n';
    }
    return out;
}

CorrelationMatrix correlation_matrix(const MonitoringSeries& series) {
    const Eigen::Index nc = series.channels();
    if (nc < 2) throw InsufficientDataError("correlation needs at least 2 channels");
    CorrelationMatrix m;
    m.channel_ids = series.channel_ids();
    m.coeff = Eigen::MatrixXd::Identity(nc, nc);
    for (Eigen::Index i = 0; i < nc; ++i) {
        for (Eigen::Index j = i + 1; j < nc; ++j) {
            // pairwise-complete: keep rows where both cells are clean
            std::vector<double> va, vb;
            for (Eigen::Index r = 0; r < series.rows(); ++r) {
                if (series.clean(r, i) && series.clean(r, j)) {
                    va.push_back(series.values()(r, i));
                    vb.push_back(series.values()(r, j));
                }
            }
            const Eigen::Map<const Eigen::VectorXd> a(va.data(), static_cast<Eigen::Index>(va.size()));
            const Eigen::Map<const Eigen::VectorXd> b(vb.data(), static_cast<Eigen::Index>(vb.size()));
            const double p = pearson(a, b);
            m.coeff(i, j) = p;
            m.coeff(j, i) = p;
        }
    }
    return m;
}

ScreenResult correlation_screen(const MonitoringSeries& series, double threshold) {
    ScreenResult res;
    res.matrix = correlation_matrix(series);
    const Eigen::Index nc = series.channels();
    std::vector<bool> dropped(static_cast<std::size_t>(nc), false);
    for (Eigen::Index i = 0; i < nc; ++i) {
        if (dropped[static_cast<std::size_t>(i)]) continue;
        for (Eigen::Index j = i + 1; j < nc; ++j) {
            if (dropped[static_cast<std::size_t>(j)]) continue;
            if (std::abs(res.matrix.coeff(i, j)) > threshold) dropped[static_cast<std::size_t>(j)] = true;
        }
    }
    for (Eigen::Index i = 0; i < nc; ++i)
        if (!dropped[static_cast<std::size_t>(i)])
            res.retained.push_back(series.channel_ids()[static_cast<std::size_t>(i)]);
    return res;
}

}  // namespace seepline
