#include "seepline/impute.hpp"

#include <algorithm>

#include "seepline/errors.hpp"

namespace seepline {

ImputeReport ni_impute(const MonitoringSeries& series, const std::string& target,
                       const std::vector<std::string>& predictors, const RfHyperparams& hp) {
    if (predictors.empty()) throw ConfigError("at least one predictor channel required");
    const Eigen::Index tc = series.channel_index(target);
    std::vector<Eigen::Index> pc;
    for (const auto& p : predictors) {
        if (p == target) throw ConfigError("target cannot be its own predictor");
        pc.push_back(series.channel_index(p));
    }

    std::vector<Eigen::Index> gaps;
    for (Eigen::Index r = 0; r < series.rows(); ++r) {
        const CellFlag f = series.flag(r, tc);
        if (f == CellFlag::missing || f == CellFlag::abnormal) gaps.push_back(r);
    }

    ImputeReport rep;
    rep.series = series;
    if (gaps.empty()) return rep;  // nothing to do, input passes through

    std::vector<std::int64_t> blocked;
    for (Eigen::Index r : gaps)
        for (Eigen::Index c : pc)
            if (!series.clean(r, c)) {
                blocked.push_back(r);
                break;
            }
    if (!blocked.empty())
        throw UnimputableRowError("predictor unavailable at " + std::to_string(blocked.size()) +
                                      " target gap(s)",
                                  std::move(blocked));

    std::vector<Eigen::Index> fit_rows;
    for (Eigen::Index r = 0; r < series.rows(); ++r) {
        if (!series.clean(r, tc)) continue;
        bool ok = true;
        for (Eigen::Index c : pc)
            if (!series.clean(r, c)) {
                ok = false;
                break;
            }
        if (ok) fit_rows.push_back(r);
    }
    if (fit_rows.size() < 50)
        throw InsufficientDataError("imputation needs at least 50 clean rows, found " +
                                    std::to_string(fit_rows.size()));

    Eigen::MatrixXd X(static_cast<Eigen::Index>(fit_rows.size()),
                      static_cast<Eigen::Index>(pc.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(fit_rows.size()));
    for (std::size_t i = 0; i < fit_rows.size(); ++i) {
        for (std::size_t j = 0; j < pc.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                series.values()(fit_rows[i], pc[j]);
        y(static_cast<Eigen::Index>(i)) = series.values()(fit_rows[i], tc);
    }

    rep.model = rf_fit(X, y, hp);

    Eigen::VectorXd x(static_cast<Eigen::Index>(pc.size()));
    for (Eigen::Index r : gaps) {
        for (std::size_t j = 0; j < pc.size(); ++j)
            x(static_cast<Eigen::Index>(j)) = series.values()(r, pc[j]);
        rep.series.set_value(r, tc, rf_predict(rep.model, x), CellFlag::imputed);
        rep.filled_rows.push_back(r);
    }
    rep.filled = static_cast<Eigen::Index>(gaps.size());
    return rep;
}

std::vector<std::pair<double, double>> observed_bounds(const MonitoringSeries& series,
                                                       const std::vector<std::string>& channels) {
    std::vector<std::pair<double, double>> bounds;
    for (const auto& id : channels) {
        const Eigen::Index c = series.channel_index(id);
        bool any = false;
        double lo = 0, hi = 0;
        for (Eigen::Index r = 0; r < series.rows(); ++r) {
            if (!series.clean(r, c)) continue;
            const double v = series.values()(r, c);
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (!any)
            throw DegenerateChannelError("channel " + id + " has no clean cells for bounds");
        if (lo == hi) throw DegenerateChannelError("channel " + id + " is constant; no usable range");
        bounds.emplace_back(lo, hi);
    }
    return bounds;
}

}  // namespace seepline
