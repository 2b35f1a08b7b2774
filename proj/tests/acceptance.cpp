// Acceptance gate. Each criterion is a self-contained end-to-end check with
// an explicit tolerance and a wall-clock budget; the budget is part of the
// verdict. Run with no arguments for the full gate, `--only N` for one
// criterion, `--cli PATH` to point criterion 10 at the command-line binary.
//
// Output is one line per criterion:
//   [PASS] criterion 3: denoising lowers RMSE ... (19/20 seeds; 0.1s, budget 10s)
// Exit status 0 iff every executed criterion passed.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seepline/errors.hpp"
#include "seepline/impute.hpp"
#include "seepline/io_util.hpp"
#include "seepline/metrics.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/nn.hpp"
#include "seepline/normalize.hpp"
#include "seepline/pipeline.hpp"
#include "seepline/rng.hpp"
#include "seepline/sobol.hpp"
#include "seepline/sweep.hpp"
#include "seepline/synth.hpp"
#include "seepline/train.hpp"
#include "seepline/wavelet.hpp"
#include "seepline/windowing.hpp"

namespace fs = std::filesystem;
using namespace seepline;
using namespace seepline::wavelet;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    std::string cli;  // path of the command-line binary, for criterion 10
};

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

fs::path scratch_dir(const std::string& tag) {
    const auto stamp =
        std::chrono::steady_clock::now().time_since_epoch().count();
    fs::path dir = fs::temp_directory_path() /
                   ("seepline-acceptance-" + tag + "-" + std::to_string(stamp));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// 1. Analysis/synthesis round trip across families, depths, and lengths.

Outcome perfect_reconstruction(const Context&) {
    Rng rng(8101);
    double worst = 0.0;
    int done = 0, skipped = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 32 + static_cast<Eigen::Index>(rng.uniform_int(993));
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.normal(0.0, 1.0);
        for (const char* name : {"db4", "db2", "haar"}) {
            const auto& f = filters(name);
            for (int level = 1; level <= 5; ++level) {
                for (Boundary b : {Boundary::symmetric, Boundary::periodic}) {
                    Decomposition d;
                    try {
                        d = decompose(x, f, level, b);
                    } catch (const LevelError&) {
                        ++skipped;  // depth not reachable at this length
                        continue;
                    }
                    const Eigen::VectorXd back = reconstruct(d);
                    if (back.size() != n) return {false, "reconstruction changed the length"};
                    const double rel =
                        (back - x).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff();
                    worst = std::max(worst, rel);
                    ++done;
                }
            }
        }
    }
    const bool pass = worst < 1e-10 && done > 5000;
    return {pass, fmt("max rel err %.2e over %d round trips (%d depth-skips)", worst,
                      done, skipped)};
}

// ---------------------------------------------------------------------------
// 2. SURE threshold equals a from-scratch exhaustive risk scan, including the
//    argmin tie rule (smallest index wins).

struct ScanResult {
    double threshold;
    Eigen::Index t_min;  // 1-based
};

ScanResult exhaustive_sure(const Eigen::VectorXd& band, double sigma) {
    const Eigen::Index n = band.size();
    std::vector<double> g(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = band(i) / sigma;
        g[static_cast<std::size_t>(i)] = s * s;
    }
    std::sort(g.begin(), g.end());
    double best_risk = 0.0;
    Eigen::Index best_t = 0;
    for (Eigen::Index t = 1; t <= n; ++t) {
        double sum = 0.0;
        for (Eigen::Index j = 1; j <= t; ++j) sum += g[static_cast<std::size_t>(j - 1)];
        double tail = 0.0;
        if (n - t >= 1) tail = static_cast<double>(n - t) * g[static_cast<std::size_t>(n - t - 1)];
        const double risk =
            (static_cast<double>(n) - 2.0 * static_cast<double>(t) + sum + tail) /
            static_cast<double>(n);
        if (best_t == 0 || risk < best_risk) {
            best_risk = risk;
            best_t = t;
        }
    }
    return {sigma * std::sqrt(g[static_cast<std::size_t>(best_t - 1)]), best_t};
}

Outcome sure_oracle_equivalence(const Context&) {
    Rng rng(8202);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform_int(256));
        Eigen::VectorXd band(n);
        for (Eigen::Index i = 0; i < n; ++i) band(i) = rng.normal(0.0, 1.0 + rng.uniform());
        const double sigma = 0.5 + 1.5 * rng.uniform();
        const auto got = rigrsure(band, sigma);
        const auto want = exhaustive_sure(band, sigma);
        if (got.threshold != want.threshold || got.t_min != want.t_min) {
            return {false, fmt("trial %d (N=%ld): got (thr=%.17g, t=%ld), scan gives "
                               "(thr=%.17g, t=%ld)",
                               trial, static_cast<long>(n), got.threshold,
                               static_cast<long>(got.t_min), want.threshold,
                               static_cast<long>(want.t_min))};
        }
    }
    return {true, "threshold and argmin exact on 100 random bands"};
}

// ---------------------------------------------------------------------------
// 3. Denoising a noisy sine must beat the noisy input in RMSE terms.

Outcome denoising_efficacy(const Context&) {
    const Eigen::Index n = 512;
    Eigen::VectorXd clean(n);
    for (Eigen::Index i = 0; i < n; ++i)
        clean(i) = std::sin(2.0 * M_PI * static_cast<double>(i) / 64.0);
    int improved = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        Eigen::VectorXd noisy = clean;
        for (Eigen::Index i = 0; i < n; ++i) noisy(i) += rng.normal(0.0, 0.1);
        const Eigen::VectorXd den =
            denoise(noisy, filters("db4"), 4, ShrinkMode::soft, Boundary::symmetric);
        const double before = rmse(clean, noisy);
        const double after = rmse(clean, den);
        improved += after < before;
        worst_ratio = std::max(worst_ratio, after / before);
    }
    return {improved >= 19,
            fmt("%d/20 seeds improved, worst RMSE ratio %.3f", improved, worst_ratio)};
}

// ---------------------------------------------------------------------------
// 4. Analytic gradients agree with central differences for every layer type.

Outcome gradient_checks(const Context&) {
    struct Case {
        const char* name;
        nn::LayerSpec spec;
        Eigen::Index in_time, in_channels;
    };
    const std::vector<Case> cases = {
        {"conv1d", nn::LayerSpec::conv1d(3, 3), 8, 2},
        {"maxpool", nn::LayerSpec::maxpool(2), 7, 3},
        {"flatten", nn::LayerSpec::flatten(), 5, 3},
        {"dense", nn::LayerSpec::dense(4, nn::Activation::tanh), 2, 5},
        {"lstm", nn::LayerSpec::lstm(4), 6, 3},
        {"gru", nn::LayerSpec::gru(4), 6, 3},
        {"rnn", nn::LayerSpec::rnn(4), 6, 3},
    };
    double worst = 0.0;
    std::string worst_name;
    for (const auto& c : cases) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto layer = nn::make_layer(c.spec, c.in_channels);
            Rng rng = Rng::substream(seed, "init");
            layer->init_params(rng);
            const auto r = nn::gradient_check_layer(*layer, c.in_time, c.in_channels, seed);
            if (r.max_rel_err > worst) {
                worst = r.max_rel_err;
                worst_name = c.name;
            }
            if (r.max_rel_err >= 1e-4)
                return {false, fmt("%s seed %llu: max rel err %.3e", c.name,
                                   static_cast<unsigned long long>(seed), r.max_rel_err)};
        }
    }
    return {true, fmt("7 layer types x 20 seeds, worst rel err %.2e (%s)", worst,
                      worst_name.c_str())};
}

// ---------------------------------------------------------------------------
// 5. The stacked conv + pool + LSTM preset must learn a clean
//    sinusoid-plus-trend to R^2 > 0.95 and MAPE < 5% within 120 epochs.

Outcome forecasting_sanity(const Context&) {
    const int n = 600;
    MonitoringSeries s({"x"});
    for (int i = 0; i < n; ++i) {
        MonitoringFrame f;
        f.timestamp = 3600LL * i;
        f.values.resize(1);
        f.values(0) = 10.0 + 0.002 * i + std::sin(2.0 * M_PI * i / 24.0);
        f.quality = {CellFlag::observed};
        s.append(f);
    }
    const auto stats = zscore_fit(s, FrameRange{0, chrono_split(s.rows()).train_end});
    const auto ds = make_windows(zscore_apply(s, stats), 10, "x");

    TrainConfig cfg;
    cfg.epochs = 120;
    cfg.seed = 1;
    auto outcome = train(nn::build_preset("cnn-lstm-2", 10, 1), ds, cfg);
    const auto row = evaluate_model(outcome.net, ds, stats, "x", "cnn-lstm-2", 0.0);
    const bool pass = row.r2 > 0.95 && row.mape < 5.0;
    return {pass, fmt("test R^2 %.4f (need > 0.95), MAPE %.2f%% (need < 5%%)", row.r2,
                      row.mape)};
}

// ---------------------------------------------------------------------------
// 6. On noisy synthetic stations the wavelet-denoised pipeline must match or
//    beat the plain pipeline's R^2 on at least 4 of 5 stations.

Outcome wavelet_benefit(const Context&) {
    SyntheticSpec spec = SyntheticSpec::defaults();
    spec.n = 1200;
    spec.seed = 77;
    spec.missing_fraction = 0.0;
    spec.stations.resize(5);
    const double periods[5] = {96, 120, 160, 200, 240};
    const double amps[5] = {1.2, 1.5, 1.0, 1.8, 1.4};
    for (int i = 0; i < 5; ++i) {
        auto& st = spec.stations[i];
        st.seasonal_period = periods[i];
        st.seasonal_amp = amps[i];
        st.rain_coupling = 0.02;
        st.water_coupling = 0.05;
        st.noise_sigma = 0.05 * st.seasonal_amp;  // noise at 5% of amplitude
    }

    const fs::path dir = scratch_dir("wavelet-benefit");
    write_csv(synth(spec).observed, dir / "input.csv");

    PipelineConfig base;
    base.input = (dir / "input.csv").string();
    base.impute.enabled = false;  // the input is gapless by construction
    base.truth = "raw";           // both variants score against the same reference
    base.train.epochs = 100;
    base.seed = 2024;

    PipelineConfig plain = base;
    plain.wavelet.enabled = false;
    plain.out = (dir / "plain").string();
    const auto r_plain = run_pipeline(plain);

    PipelineConfig wave = base;
    wave.out = (dir / "wave").string();
    const auto r_wave = run_pipeline(wave);

    int better = 0;
    std::ostringstream pairs;
    for (std::size_t i = 0; i < r_plain.report.rows.size(); ++i) {
        const auto& p = r_plain.report.rows[i];
        const auto& w = r_wave.report.rows[i];
        if (p.failed() || w.failed()) return {false, "a pipeline station failed: " + p.error + w.error};
        better += w.r2 >= p.r2;
        pairs << (i ? ", " : "") << p.station << " " << (w.r2 >= p.r2 ? "+" : "-");
    }
    fs::remove_all(dir);
    return {better >= 4,
            fmt("wavelet >= plain on %d/5 stations (%s)", better, pairs.str().c_str())};
}

// ---------------------------------------------------------------------------
// 7. Forest imputation recovers blanked cells of a channel that is an exact
//    function of the rainfall and water-level drivers.

Outcome imputation_accuracy(const Context&) {
    SyntheticSpec spec = SyntheticSpec::defaults();
    spec.n = 1000;
    spec.seed = 31;
    spec.missing_fraction = 0.10;
    spec.stations.resize(1);
    auto& st = spec.stations[0];
    st.id = "target";
    st.base = 10.0;
    st.trend = 0.0;
    st.seasonal_amp = 0.0;  // value depends on the drivers alone
    st.rain_coupling = 0.4;
    st.water_coupling = 0.8;
    st.noise_sigma = 0.0;

    const auto data = synth(spec);
    RfHyperparams hp;
    hp.seed = 7;
    const auto report =
        ni_impute(data.observed, "target", {"rainfall", "waterlevel"}, hp);

    const Eigen::Index col = data.truth.channel_index("target");
    Eigen::Index within = 0;
    double worst = 0.0;
    for (const auto row : report.filled_rows) {
        const double truth = data.truth.frame(row).values(col);
        const double imputed = report.series.frame(row).values(col);
        const double rel = std::abs(imputed - truth) / std::abs(truth);
        worst = std::max(worst, rel);
        within += rel <= 0.05;
    }
    if (report.filled == 0) return {false, "no cells were blanked"};
    const double frac =
        static_cast<double>(within) / static_cast<double>(report.filled);
    return {frac >= 0.90, fmt("%ld/%ld imputed cells within 5%% (%.1f%%), worst %.2f%%",
                              static_cast<long>(within), static_cast<long>(report.filled),
                              100.0 * frac, 100.0 * worst)};
}

// ---------------------------------------------------------------------------
// 8. First-order Sobol indices of the Ishigami function (a=7, b=0.1) match
//    the analytic values (0.3139, 0.4424, 0) within 0.05.

Outcome sobol_ishigami(const Context&) {
    const double a = 7.0, b = 0.1;
    const ModelFn ishigami = [a, b](const Eigen::Ref<const Eigen::VectorXd>& x) {
        return std::sin(x(0)) + a * std::sin(x(1)) * std::sin(x(1)) +
               b * std::pow(x(2), 4.0) * std::sin(x(0));
    };
    const std::vector<std::pair<double, double>> bounds(3, {-M_PI, M_PI});
    const auto res = sobol_indices(ishigami, bounds, 4096, 11);
    const double expect[3] = {0.3139, 0.4424, 0.0};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(res.s1(i) - expect[i]));
    return {worst <= 0.05, fmt("S1 = (%.4f, %.4f, %.4f), max deviation %.4f (need <= 0.05)",
                               res.s1(0), res.s1(1), res.s1(2), worst)};
}

// ---------------------------------------------------------------------------
// 9. Metric identities on random instances: symmetry of RMSE, perfect-
//    predictor zeros, mean-predictor R^2 = 0, affine invariance of R^2.

Outcome metric_identities(const Context&) {
    Rng rng(8909);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_int(199));
        Eigen::VectorXd y(n), p(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            y(i) = sign * (0.5 + 2.0 * rng.uniform());  // bounded away from zero
            p(i) = y(i) + rng.normal(0.0, 0.3);
        }
        if (rmse(y, p) != rmse(p, y)) return {false, fmt("trial %d: RMSE not symmetric", trial)};
        if (rmse(y, y) != 0.0 || mape(y, y) != 0.0 || r2(y, y) != 1.0)
            return {false, fmt("trial %d: perfect predictor not exact", trial)};

        const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(n, y.mean());
        if (std::abs(r2(y, mean_pred)) > 1e-12)
            return {false, fmt("trial %d: mean predictor R^2 = %.3e", trial, r2(y, mean_pred))};

        const double sa = 0.5 + 3.0 * rng.uniform();
        const double sb = rng.normal(0.0, 5.0);
        const double base = r2(y, p);
        const Eigen::VectorXd ym = ((sa * y).array() + sb).matrix();
        const Eigen::VectorXd pm = ((sa * p).array() + sb).matrix();
        const double mapped = r2(ym, pm);
        if (std::abs(mapped - base) > 1e-9 * std::max(1.0, std::abs(base)))
            return {false, fmt("trial %d: R^2 not affine invariant (%.17g vs %.17g)", trial,
                               base, mapped)};

        if (std::abs(rmse(sa * y, sa * p) - sa * rmse(y, p)) > 1e-12 * sa * rmse(y, p) + 1e-300)
            return {false, fmt("trial %d: RMSE not absolutely homogeneous", trial)};
    }
    return {true, "identities hold on 100 random instances"};
}

// ---------------------------------------------------------------------------
// 10. Two invocations of the command-line `run` with the same config and seed
//     produce bitwise-identical manifests and checkpoints.

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const Context& ctx) {
    if (ctx.cli.empty() || !fs::exists(ctx.cli))
        return {false, "command-line binary not found (pass --cli PATH)"};

    const fs::path dir = scratch_dir("determinism");
    SyntheticSpec spec = SyntheticSpec::defaults();
    spec.n = 400;
    spec.seed = 5;
    spec.missing_fraction = 0.03;
    spec.stations.resize(2);
    spec.stations[0].id = "sA";
    spec.stations[1].id = "sB";
    write_csv(synth(spec).observed, dir / "input.csv");

    nlohmann::json cfg = {
        {"input", (dir / "input.csv").string()},
        {"network", {{"preset", "cnn-lstm-2"}}},
        {"window_len", 10},
        {"impute", {{"trees", 20}}},
        {"wavelet", {{"family", "db2"}, {"level", 2}}},
        {"train", {{"epochs", 3}}},
        {"seed", 9},
    };
    atomic_write_file(dir / "cfg.json", cfg.dump(2) + "\n");

    for (const char* out : {"out1", "out2"}) {
        const std::string args = "run --config \"" + (dir / "cfg.json").string() +
                                 "\" --out \"" + (dir / out).string() + "\"";
        const int rc = run_cli(ctx.cli, args, dir / (std::string(out) + ".log"));
        if (rc != 0) {
            return {false, fmt("`run` into %s exited with %d (log: %s)", out, rc,
                               (dir / (std::string(out) + ".log")).string().c_str())};
        }
    }

    const std::vector<std::string> files = {"manifest.json", "checkpoint_sA.json",
                                            "checkpoint_sB.json"};
    for (const auto& name : files) {
        const std::string a = read_file(dir / "out1" / name);
        const std::string b = read_file(dir / "out2" / name);
        if (a != b) return {false, name + " differs between the two runs"};
    }
    fs::remove_all(dir);
    return {true, "manifest and both checkpoints byte-identical across runs"};
}

// ---------------------------------------------------------------------------

struct Criterion {
    int number;
    const char* name;
    double budget_seconds;
    std::function<Outcome(const Context&)> fn;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "perfect wavelet reconstruction (rel err < 1e-10)", 10.0, perfect_reconstruction},
        {2, "SURE threshold equals exhaustive risk scan", 5.0, sure_oracle_equivalence},
        {3, "denoising lowers RMSE on noisy sines (>= 19/20 seeds)", 10.0, denoising_efficacy},
        {4, "layer gradients match central differences (< 1e-4)", 60.0, gradient_checks},
        {5, "conv-LSTM preset fits sinusoid-plus-trend (R^2 > 0.95, MAPE < 5%)", 180.0,
         forecasting_sanity},
        {6, "wavelet pipeline matches or beats plain on >= 4/5 stations", 900.0,
         wavelet_benefit},
        {7, "forest imputation within 5% on >= 90% of blanked cells", 60.0,
         imputation_accuracy},
        {8, "Sobol indices on Ishigami within 0.05 of analytic", 30.0, sobol_ishigami},
        {9, "metric identities on random instances", 5.0, metric_identities},
        {10, "bitwise-identical manifests and checkpoints across reruns", 300.0, determinism},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    Context ctx;
    // Default CLI location: sibling tools/ directory of this binary.
    ctx.cli = (fs::path(argv[0]).parent_path() / ".." / "tools" / "seepline").string();
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--cli" && i + 1 < argc) {
            ctx.cli = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--only N] [--cli PATH]\n", argv[0]);
            return 2;
        }
    }

    bool all_pass = true;
    for (const auto& c : criteria()) {
        if (only != 0 && c.number != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.fn(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool pass = o.pass && secs < c.budget_seconds;
        all_pass = all_pass && pass;
        std::printf("[%s] criterion %d: %s (%s; %.1fs, budget %.0fs)\n",
                    pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(), secs,
                    c.budget_seconds);
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
