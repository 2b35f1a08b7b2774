#include "seepline/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "seepline/errors.hpp"

namespace seepline::wavelet {

Boundary boundary_from_name(std::string_view name) {
    if (name == "symmetric") return Boundary::symmetric;
    if (name == "periodic") return Boundary::periodic;
    throw ConfigError("unknown boundary mode: " + std::string(name));
}

ShrinkMode shrink_mode_from_name(std::string_view name) {
    if (name == "soft") return ShrinkMode::soft;
    if (name == "hard") return ShrinkMode::hard;
    throw ConfigError("unknown shrink mode: " + std::string(name));
}

const char* boundary_name(Boundary b) { return b == Boundary::symmetric ? "symmetric" : "periodic"; }
const char* shrink_mode_name(ShrinkMode m) { return m == ShrinkMode::soft ? "soft" : "hard"; }

namespace {

FilterPair make_pair(std::string name, std::vector<double> scaling) {
    FilterPair f;
    f.name = std::move(name);
    const auto n = static_cast<Eigen::Index>(scaling.size());
    f.lo = Eigen::Map<const Eigen::VectorXd>(scaling.data(), n);
    f.hi.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) f.hi(k) = (k % 2 == 0 ? 1.0 : -1.0) * f.lo(n - 1 - k);
    return f;
}

std::map<std::string, FilterPair, std::less<>> build_families() {
    std::map<std::string, FilterPair, std::less<>> m;
    const double r2 = std::sqrt(2.0);
    const double r3 = std::sqrt(3.0);
    m.emplace("haar", make_pair("haar", {1.0 / r2, 1.0 / r2}));
    m.emplace("db2", make_pair("db2", {(1 + r3) / (4 * r2), (3 + r3) / (4 * r2),
                                       (3 - r3) / (4 * r2), (1 - r3) / (4 * r2)}));
    m.emplace("db4", make_pair("db4", {0.23037781330885523, 0.71484657055254153,
                                       0.63088076792959036, -0.02798376941698385,
                                       -0.18703481171888114, 0.030841381835986965,
                                       0.032883011666982945, -0.010597401784997278}));
    return m;
}

// Boundary-extended sample access; symmetric is half-point mirroring with
// the edge sample repeated, periodic wraps modulo n.
double sample(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index i, Boundary boundary) {
    const Eigen::Index n = x.size();
    if (boundary == Boundary::periodic) {
        i %= n;
        if (i < 0) i += n;
        return x(i);
    }
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return x(i);
}

Eigen::Index dwt_out_len(Eigen::Index n, Eigen::Index flen, Boundary boundary) {
    if (boundary == Boundary::periodic) return (n + 1) / 2;
    return (n + flen - 1) / 2;
}

}  // namespace

const FilterPair& filters(std::string_view name) {
    static const auto families = build_families();
    auto it = families.find(name);
    if (it == families.end()) throw ConfigError("unknown wavelet family: " + std::string(name));
    return it->second;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> dwt_step(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                     const FilterPair& f, Boundary boundary) {
    const Eigen::Index flen = f.length();
    if (x.size() < flen)
        throw InsufficientDataError("signal shorter than filter (" + std::to_string(x.size()) +
                                    " < " + std::to_string(flen) + ")");

    // Periodization keeps the transform orthogonal; odd lengths are padded
    // by repeating the last sample once.
    Eigen::VectorXd xin = x;
    if (boundary == Boundary::periodic && x.size() % 2 == 1) {
        xin.conservativeResize(x.size() + 1);
        xin(x.size()) = x(x.size() - 1);
    }
    const Eigen::Index n = xin.size();
    const Eigen::Index out_len = dwt_out_len(x.size(), flen, boundary);

    Eigen::VectorXd lo_out(out_len), hi_out(out_len);
    for (Eigen::Index k = 0; k < out_len; ++k) {
        const Eigen::Index base = 2 * k - flen + 2;
        double lo_acc = 0, hi_acc = 0;
        for (Eigen::Index i = 0; i < flen; ++i) {
            const double v = sample(xin, base + i, boundary);
            lo_acc += f.lo(i) * v;
            hi_acc += f.hi(i) * v;
        }
        lo_out(k) = lo_acc;
        hi_out(k) = hi_acc;
    }
    (void)n;
    return {std::move(lo_out), std::move(hi_out)};
}

Eigen::VectorXd idwt_step(const Eigen::Ref<const Eigen::VectorXd>& approx,
                          const Eigen::Ref<const Eigen::VectorXd>& detail, const FilterPair& f,
                          Boundary boundary, Eigen::Index target_len) {
    if (approx.size() != detail.size())
        throw ShapeError("approximation and detail band lengths differ");
    const Eigen::Index la = approx.size();
    const Eigen::Index flen = f.length();

    if (boundary == Boundary::periodic) {
        // Adjoint of the (orthogonal) analysis step.
        const Eigen::Index n = 2 * la;
        Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < la; ++k) {
            const Eigen::Index base = 2 * k - flen + 2;
            for (Eigen::Index i = 0; i < flen; ++i) {
                Eigen::Index m = (base + i) % n;
                if (m < 0) m += n;
                out(m) += approx(k) * f.lo(i) + detail(k) * f.hi(i);
            }
        }
        if (target_len > n) throw ShapeError("band lengths inconsistent with target length");
        return out.head(target_len);
    }

    // Zero-interleave, convolve with the synthesis pair, keep the centre.
    const Eigen::Index up_len = 2 * la - 1;
    const Eigen::Index full_len = up_len + flen - 1;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(full_len);
    for (Eigen::Index k = 0; k < la; ++k) {
        const Eigen::Index pos = 2 * k;
        for (Eigen::Index i = 0; i < flen; ++i)
            acc(pos + i) += approx(k) * f.lo(i) + detail(k) * f.hi(i);
    }
    const Eigen::Index skip = flen - 2;
    const Eigen::Index avail = full_len - 2 * skip;
    if (target_len > avail) throw ShapeError("band lengths inconsistent with target length");
    return acc.segment(skip, target_len);
}

Decomposition decompose(const Eigen::Ref<const Eigen::VectorXd>& x, const FilterPair& f, int level,
                        Boundary boundary) {
    if (level < 1) throw LevelError("decomposition level must be >= 1");
    // Validate the whole cascade up front.
    Eigen::Index len = x.size();
    for (int l = 0; l < level; ++l) {
        if (len < f.length())
            throw LevelError("level " + std::to_string(level) + " too deep for length " +
                             std::to_string(x.size()) + " with filter " + f.name);
        len = dwt_out_len(len, f.length(), boundary);
    }

    Decomposition d;
    d.level = level;
    d.original_length = x.size();
    d.filter = f.name;
    d.boundary = boundary;
    Eigen::VectorXd current = x;
    for (int l = 0; l < level; ++l) {
        auto [lo, hi] = dwt_step(current, f, boundary);
        d.details.push_back(std::move(hi));
        current = std::move(lo);
    }
    d.approx = std::move(current);
    return d;
}

Eigen::VectorXd reconstruct(const Decomposition& d) {
    const FilterPair& f = filters(d.filter);

    // Recompute the length cascade to know each level's target length.
    std::vector<Eigen::Index> lengths(static_cast<std::size_t>(d.level) + 1);
    lengths[0] = d.original_length;
    for (int l = 1; l <= d.level; ++l)
        lengths[static_cast<std::size_t>(l)] =
            dwt_out_len(lengths[static_cast<std::size_t>(l - 1)], f.length(), d.boundary);

    if (d.details.size() != static_cast<std::size_t>(d.level))
        throw ShapeError("detail band count does not match level");
    if (d.approx.size() != lengths[static_cast<std::size_t>(d.level)])
        throw ShapeError("approximation band length inconsistent with original length");
    for (int l = 1; l <= d.level; ++l)
        if (d.details[static_cast<std::size_t>(l - 1)].size() != lengths[static_cast<std::size_t>(l)])
            throw ShapeError("detail band " + std::to_string(l) + " has inconsistent length");

    Eigen::VectorXd current = d.approx;
    for (int l = d.level; l >= 1; --l)
        current = idwt_step(current, d.details[static_cast<std::size_t>(l - 1)], f, d.boundary,
                            lengths[static_cast<std::size_t>(l - 1)]);
    return current;
}

SureThreshold rigrsure(const Eigen::Ref<const Eigen::VectorXd>& band, double sigma) {
    const Eigen::Index n = band.size();
    if (n == 0) throw InsufficientDataError("rigrsure on empty band");
    if (!(sigma > 0)) throw ConfigError("noise scale must be positive");

    SureThreshold st;
    st.sorted_sq = (band / sigma).array().square();
    std::sort(st.sorted_sq.data(), st.sorted_sq.data() + n);

    st.risk.resize(n);
    double cum = 0;
    for (Eigen::Index t = 1; t <= n; ++t) {
        cum += st.sorted_sq(t - 1);
        const double tail = (n - t >= 1) ? static_cast<double>(n - t) * st.sorted_sq(n - t - 1) : 0.0;
        st.risk(t - 1) = (static_cast<double>(n) - 2.0 * static_cast<double>(t) + cum + tail) /
                         static_cast<double>(n);
    }

    st.t_min = 1;
    for (Eigen::Index t = 2; t <= n; ++t)
        if (st.risk(t - 1) < st.risk(st.t_min - 1)) st.t_min = t;
    st.threshold = sigma * std::sqrt(st.sorted_sq(st.t_min - 1));
    return st;
}

Eigen::VectorXd shrink(const Eigen::Ref<const Eigen::VectorXd>& band, double gamma, ShrinkMode mode) {
    if (gamma < 0) throw ConfigError("shrink threshold must be non-negative");
    Eigen::VectorXd out(band.size());
    for (Eigen::Index i = 0; i < band.size(); ++i) {
        const double w = band(i);
        if (mode == ShrinkMode::soft) {
            const double m = std::abs(w) - gamma;
            out(i) = m > 0 ? (w > 0 ? m : -m) : 0.0;
        } else {
            out(i) = std::abs(w) > gamma ? w : 0.0;
        }
    }
    return out;
}

double noise_scale(const Eigen::Ref<const Eigen::VectorXd>& finest_detail) {
    const Eigen::Index n = finest_detail.size();
    if (n == 0) throw InsufficientDataError("noise scale of empty band");
    std::vector<double> mag(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) mag[static_cast<std::size_t>(i)] = std::abs(finest_detail(i));
    std::sort(mag.begin(), mag.end());
    const double median = (n % 2 == 1) ? mag[static_cast<std::size_t>(n / 2)]
                                       : 0.5 * (mag[static_cast<std::size_t>(n / 2 - 1)] +
                                                mag[static_cast<std::size_t>(n / 2)]);
    return median / 0.6745;
}

Eigen::VectorXd denoise(const Eigen::Ref<const Eigen::VectorXd>& x, const FilterPair& f, int level,
                        ShrinkMode mode, Boundary boundary) {
    Decomposition d = decompose(x, f, level, boundary);
    const double sigma = noise_scale(d.details.front());
    for (auto& band : d.details) {
        if (!(sigma > 0) || band.size() == 0) continue;  // nothing to threshold
        const double gamma = rigrsure(band, sigma).threshold;
        band = shrink(band, gamma, mode);
    }
    return reconstruct(d);
}

nlohmann::json Decomposition::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["filter"] = filter;
    j["boundary"] = boundary_name(boundary);
    j["level"] = level;
    j["original_length"] = original_length;
    j["approx"] = std::vector<double>(approx.data(), approx.data() + approx.size());
    nlohmann::json det = nlohmann::json::array();
    for (const auto& band : details)
        det.push_back(std::vector<double>(band.data(), band.data() + band.size()));
    j["details_finest_first"] = det;
    return j;
}

Decomposition Decomposition::from_json(const nlohmann::json& j) {
    Decomposition d;
    d.filter = j.at("filter").get<std::string>();
    d.boundary = boundary_from_name(j.at("boundary").get<std::string>());
    d.level = j.at("level").get<int>();
    d.original_length = j.at("original_length").get<Eigen::Index>();
    auto a = j.at("approx").get<std::vector<double>>();
    d.approx = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    for (const auto& band : j.at("details_finest_first")) {
        auto v = band.get<std::vector<double>>();
        d.details.emplace_back(
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return d;
}

}  // namespace seepline::wavelet
