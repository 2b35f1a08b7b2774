#include "seepline/sobol.hpp"

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/rng.hpp"

namespace seepline {

SobolResult sobol_indices(const ModelFn& model,
                          const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                          std::uint64_t seed) {
    const auto d = static_cast<Eigen::Index>(bounds.size());
    if (d == 0) throw ConfigError("no feature bounds given");
    if (n < 64) throw ConfigError("sample count must be at least 64");
    for (const auto& [lo, hi] : bounds)
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
            throw ConfigError("feature bounds must be finite with lo < hi");

    Rng rng = Rng::substream(seed, "sobol");
    Eigen::MatrixXd A(n, d), B(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            A(i, j) = rng.uniform(bounds[static_cast<std::size_t>(j)].first,
                                  bounds[static_cast<std::size_t>(j)].second);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            B(i, j) = rng.uniform(bounds[static_cast<std::size_t>(j)].first,
                                  bounds[static_cast<std::size_t>(j)].second);

    Eigen::VectorXd fA(n), fB(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        fA(i) = model(A.row(i));
        fB(i) = model(B.row(i));
    }

    // Variance over the pooled base evaluations. Outputs are centered on the
    // pooled mean before forming pick-freeze products; the expectation is
    // unchanged and the estimator noise drops substantially.
    const double mean = (fA.sum() + fB.sum()) / static_cast<double>(2 * n);
    fA.array() -= mean;
    fB.array() -= mean;
    const double var =
        (fA.squaredNorm() + fB.squaredNorm()) / static_cast<double>(2 * n);
    if (!(var > 0)) throw DegenerateVarianceError("model output has zero variance over bounds");

    SobolResult res;
    res.samples = n;
    res.seed = seed;
    res.s1.resize(d);
    res.st.resize(d);

    Eigen::VectorXd row(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double s1_acc = 0, st_acc = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            row = A.row(i);
            row(j) = B(i, j);
            const double fABj = model(row) - mean;
            s1_acc += fB(i) * (fABj - fA(i));
            st_acc += (fA(i) - fABj) * (fA(i) - fABj);
        }
        res.s1(j) = s1_acc / static_cast<double>(n) / var;
        res.st(j) = st_acc / (2.0 * static_cast<double>(n)) / var;
    }
    return res;
}

SobolResult sobol_indices(const RandomForest& model,
                          const std::vector<std::pair<double, double>>& bounds, Eigen::Index n,
                          std::uint64_t seed) {
    return sobol_indices(
        ModelFn([&model](const Eigen::Ref<const Eigen::VectorXd>& x) {
            return rf_predict(model, x);
        }),
        bounds, n, seed);
}

}  // namespace seepline
