#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace seepline::wavelet {

enum class Boundary { symmetric, periodic };
enum class ShrinkMode { soft, hard };

Boundary boundary_from_name(std::string_view name);
ShrinkMode shrink_mode_from_name(std::string_view name);
const char* boundary_name(Boundary b);
const char* shrink_mode_name(ShrinkMode m);

/// Orthonormal analysis/synthesis filter pair. `lo` holds the scaling
/// coefficients (sum = sqrt(2)); `hi` is its quadrature mirror,
/// hi[k] = (-1)^k * lo[len-1-k]. The same pair drives decomposition
/// (by correlation) and reconstruction (by convolution).
struct FilterPair {
    std::string name;
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    Eigen::Index length() const { return lo.size(); }
};

/// Shipped families: "haar", "db2", "db4".
const FilterPair& filters(std::string_view name);

/// One analysis step: boundary-extended filtering followed by dyadic
/// downsampling. Returns (approximation, detail).
std::pair<Eigen::VectorXd, Eigen::VectorXd> dwt_step(const Eigen::Ref<const Eigen::VectorXd>& x,
                                                     const FilterPair& f,
                                                     Boundary boundary = Boundary::symmetric);

/// Inverse of dwt_step; `target_len` is the length of the signal the bands
/// came from.
Eigen::VectorXd idwt_step(const Eigen::Ref<const Eigen::VectorXd>& approx,
                          const Eigen::Ref<const Eigen::VectorXd>& detail, const FilterPair& f,
                          Boundary boundary, Eigen::Index target_len);

/// Multilevel decomposition: approximation band at the deepest level plus
/// one detail band per level, finest first (details[0] is level 1).
struct Decomposition {
    int level = 0;
    Eigen::VectorXd approx;
    std::vector<Eigen::VectorXd> details;
    Eigen::Index original_length = 0;
    std::string filter;
    Boundary boundary = Boundary::symmetric;

    nlohmann::json to_json() const;
    static Decomposition from_json(const nlohmann::json& j);
};

Decomposition decompose(const Eigen::Ref<const Eigen::VectorXd>& x, const FilterPair& f, int level,
                        Boundary boundary = Boundary::symmetric);

/// Inverse cascade, truncated to the stored original length.
Eigen::VectorXd reconstruct(const Decomposition& d);

/// SURE-minimizing threshold over the sorted squared coefficients of one
/// band. Coefficients are scaled by 1/sigma before the risk scan; the
/// returned threshold is back on the original scale.
struct SureThreshold {
    double threshold = 0;       // sigma * sqrt(g(t_min))
    Eigen::VectorXd sorted_sq;  // g(k): squared scaled coefficients, ascending
    Eigen::VectorXd risk;       // risk[t-1] for t = 1..N
    Eigen::Index t_min = 0;     // 1-based argmin of the risk curve, ties to smallest t
};

SureThreshold rigrsure(const Eigen::Ref<const Eigen::VectorXd>& band, double sigma);

/// Soft: sign(w)*max(|w|-gamma, 0). Hard: w kept only where |w| > gamma.
Eigen::VectorXd shrink(const Eigen::Ref<const Eigen::VectorXd>& band, double gamma, ShrinkMode mode);

/// Robust noise scale of a detail band: median(|w|)/0.6745.
double noise_scale(const Eigen::Ref<const Eigen::VectorXd>& finest_detail);

/// decompose -> rigrsure+shrink per detail band -> reconstruct. The
/// approximation band is never thresholded; output length equals input.
Eigen::VectorXd denoise(const Eigen::Ref<const Eigen::VectorXd>& x, const FilterPair& f, int level,
                        ShrinkMode mode = ShrinkMode::soft, Boundary boundary = Boundary::symmetric);

}  // namespace seepline::wavelet
