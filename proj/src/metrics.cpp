#include "seepline/metrics.hpp"

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/io_util.hpp"

namespace seepline {

namespace {
void check_lengths(const Eigen::Ref<const Eigen::VectorXd>& truth,
                   const Eigen::Ref<const Eigen::VectorXd>& pred) {
    if (truth.size() != pred.size())
        throw SchemaError("truth and prediction lengths differ: " + std::to_string(truth.size()) +
                          " vs " + std::to_string(pred.size()));
    if (truth.size() == 0) throw InsufficientDataError("empty series");
}
}  // namespace

double rmse(const Eigen::Ref<const Eigen::VectorXd>& truth,
            const Eigen::Ref<const Eigen::VectorXd>& pred) {
    check_lengths(truth, pred);
    return std::sqrt((truth - pred).squaredNorm() / static_cast<double>(truth.size()));
}

double mape(const Eigen::Ref<const Eigen::VectorXd>& truth,
            const Eigen::Ref<const Eigen::VectorXd>& pred) {
    check_lengths(truth, pred);
    constexpr double kGuard = 1e-8;
    double sum = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (std::abs(truth(i)) <= kGuard)
            throw ZeroDenominatorError("truth value at index " + std::to_string(i) +
                                           " is within the zero guard",
                                       i);
        sum += std::abs((truth(i) - pred(i)) / truth(i));
    }
    return 100.0 * sum / static_cast<double>(truth.size());
}

double r2(const Eigen::Ref<const Eigen::VectorXd>& truth,
          const Eigen::Ref<const Eigen::VectorXd>& pred) {
    check_lengths(truth, pred);
    if (truth.size() < 2) throw InsufficientDataError("r2 needs at least 2 samples");
    const double mean = truth.mean();
    const double sst = (truth.array() - mean).square().sum();
    if (!(sst > 0)) throw DegenerateVarianceError("constant truth series");
    const double sse = (truth - pred).squaredNorm();
    return 1.0 - sse / sst;
}

namespace {
std::string metric_cell(const EvalRow& r, double v) { return r.failed() ? "" : format_double(v); }
}  // namespace

std::string EvalReport::to_csv() const {
    std::string out = "station,model,rmse,mape,r2,runtime_seconds,n,error\n";
    for (const auto& r : rows) {
        out += r.station + ',' + r.model + ',' + metric_cell(r, r.rmse) + ',' +
               metric_cell(r, r.mape) + ',' + metric_cell(r, r.r2) + ',' +
               format_double(r.runtime_seconds) + ',' + std::to_string(r.n) + ',' + r.error + '\n';
    }
    return out;
}

std::string EvalReport::to_markdown() const {
    std::string out = "| Station | Model | RMSE | MAPE | R2 | Runtime (s) | n |\n";
    out += "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        if (r.failed()) {
            out += "| " + r.station + " | " + r.model + " | error: " + r.error + " | | | | |\n";
            continue;
        }
        out += "| " + r.station + " | " + r.model + " | " + format_double(r.rmse) + " | " +
               format_double(r.mape) + " | " + format_double(r.r2) + " | " +
               format_double(r.runtime_seconds) + " | " + std::to_string(r.n) + " |\n";
    }
    return out;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["station"] = r.station;
        j["model"] = r.model;
        if (r.failed()) {
            j["error"] = r.error;
        } else {
            j["rmse"] = r.rmse;
            j["mape"] = r.mape;
            j["r2"] = r.r2;
        }
        j["runtime_seconds"] = r.runtime_seconds;
        j["n"] = r.n;
        rows_json.push_back(j);
    }
    return nlohmann::json{{"version", 1}, {"rows", rows_json}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport report;
    for (const auto& row : j.at("rows")) {
        EvalRow r;
        r.station = row.at("station").get<std::string>();
        r.model = row.at("model").get<std::string>();
        if (row.contains("error")) {
            r.error = row.at("error").get<std::string>();
        } else {
            r.rmse = row.at("rmse").get<double>();
            r.mape = row.at("mape").get<double>();
            r.r2 = row.at("r2").get<double>();
        }
        r.runtime_seconds = row.at("runtime_seconds").get<double>();
        r.n = row.at("n").get<Eigen::Index>();
        report.rows.push_back(std::move(r));
    }
    return report;
}

}  // namespace seepline
