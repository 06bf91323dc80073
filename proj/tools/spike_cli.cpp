// Command-line harness: matrix generation, machine-constant calibration,
// factor/solve benchmarking, partition-ratio sweeps, and an accuracy study
// against the serial oracle.

#include <CLI11.hpp>

#include "spike/band_io.hpp"
#include "spike/band_ops.hpp"
#include "spike/factorize.hpp"
#include "spike/generate.hpp"
#include "spike/oracle.hpp"
#include "spike/partition.hpp"
#include "spike/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace spike;

struct CommonOpts {
    int n = 0;
    int kl = -1, ku = -1, k = -1;
    int nrhs = 1;
    double dd = 1.5;
    std::uint64_t seed = 42;
    bool pivot = false;
    bool transpose = false;
    double boost_eps = default_boost_eps();
    double ratio_k = 0.0; // 0 = read cache / default
    double r12 = 0.0, r13 = 0.0;
    std::string cache_path;
    std::string csv_path;
};

void add_band_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--kl", o.kl, "sub-diagonal count");
    cmd->add_option("--ku", o.ku, "super-diagonal count");
    cmd->add_option("--k", o.k, "half-bandwidth (sets both kl and ku)");
    cmd->add_option("--dd", o.dd, "degree of diagonal dominance")->capture_default_str();
    cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
}

void resolve_band(CommonOpts& o) {
    if (o.k >= 0) {
        if (o.kl < 0) o.kl = o.k;
        if (o.ku < 0) o.ku = o.k;
    }
    if (o.kl < 0 || o.ku < 0)
        throw CLI::ValidationError("band", "specify --k or both --kl and --ku");
}

std::ostream& csv_stream(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open " + path);
    return file;
}

double resolve_ratio_k(const CommonOpts& o) {
    if (o.ratio_k > 0.0) return o.ratio_k;
    const std::string path = o.cache_path.empty() ? default_k_cache_path() : o.cache_path;
    if (auto cached = read_k_cache(path)) return *cached;
    return 1.0;
}

std::pair<double, double> resolve_ratios(const CommonOpts& o, int k) {
    if (o.r12 > 0.0 && o.r13 > 0.0) return {o.r12, o.r13};
    return compute_ratios(resolve_ratio_k(o), o.nrhs, std::max(k, 1));
}

template <typename Fn>
double median_seconds(int reps, Fn&& fn) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        t.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

int cmd_gen(const CommonOpts& o, const std::string& out, const std::string& format) {
    BandedMatrix a = generate_banded(o.n, o.kl, o.ku, o.dd, RngSeed{o.seed});
    const MatrixFormat fmt = format == "mm" ? MatrixFormat::MatrixMarket : MatrixFormat::Spkb;
    write_matrix(a, out, fmt);
    std::printf("wrote %s: n=%d kl=%d ku=%d dd=%.6g measured_dd=%.6g\n", out.c_str(), a.n(),
                a.kl(), a.ku(), o.dd, degree_of_diagonal_dominance(a));
    return 0;
}

int cmd_calibrate(int n, int k, int reps, bool write_cache, const std::string& cache) {
    CalibrationResult r = calibrate_k(n, k, reps);
    if (r.timer_warning)
        std::fprintf(stderr,
                     "warning: sample too small for the timer (%.1f ms total); "
                     "use a larger --n for a trustworthy K\n",
                     1e3 * (r.factor_seconds + r.solve_seconds));
    std::printf("K=%.6g factor_seconds=%.6g solve_seconds=%.6g\n", r.k, r.factor_seconds,
                r.solve_seconds);
    if (write_cache) {
        const std::string path = cache.empty() ? default_k_cache_path() : cache;
        write_k_cache(path, r.k);
        std::printf("cached K to %s\n", path.c_str());
    }
    return 0;
}

int cmd_bench(const CommonOpts& o, const std::vector<int>& threads) {
    BandedMatrix a = generate_banded(o.n, o.kl, o.ku, o.dd, RngSeed{o.seed});
    DenseBlock f = random_block(o.n, o.nrhs, RngSeed{o.seed + 1});
    const auto [r12, r13] = resolve_ratios(o, std::max(o.kl, o.ku));

    std::ofstream file;
    std::ostream& os = csv_stream(o.csv_path, file);
    os << "stage,threads,seconds,residual,factor_sweeps,solve_sweeps\n";

    bool residuals_ok = true;
    const bool gate = o.dd >= 1.0;
    char buf[256];
    for (int t : threads) {
        PartitionPlan plan = make_plan(o.n, o.kl, o.ku, t, r12, r13);
        FactorOptions opts{o.pivot, o.boost_eps};
        SpikeFactorization fact = factorize(a, plan, opts);
        const double tf = median_seconds(3, [&] { fact = factorize(a, plan, opts); });

        SolveStats st;
        DenseBlock x = solve(fact, f, &st);
        const double ts = median_seconds(3, [&] { x = solve(fact, f, &st); });
        const double res = relative_residual(a, x, f);
        if (gate && !(res <= 1e-12)) residuals_ok = false;

        long fsw = 0;
        for (long v : fact.factor_sweeps) fsw += v;

        std::snprintf(buf, sizeof buf, "factor,%d,%.6g,,%ld,\n", t, tf, fsw);
        os << buf;
        std::snprintf(buf, sizeof buf, "solve,%d,%.6g,%.3e,%ld,%ld\n", t, ts, res, fsw,
                      st.total_full_sweeps());
        os << buf;
        std::snprintf(buf, sizeof buf, "combined,%d,%.6g,%.3e,%ld,%ld\n", t, tf + ts, res, fsw,
                      st.total_full_sweeps());
        os << buf;

        if (o.transpose) {
            SolveStats tt;
            DenseBlock xt = transpose_solve(fact, f, &tt);
            const double tts = median_seconds(3, [&] { xt = transpose_solve(fact, f, &tt); });
            const double rest = relative_residual(a, xt, f, true);
            if (gate && !(rest <= 1e-12)) residuals_ok = false;
            std::snprintf(buf, sizeof buf, "transpose-solve,%d,%.6g,%.3e,%ld,%ld\n", t, tts, rest,
                          fsw, tt.total_full_sweeps());
            os << buf;
        }
    }
    if (!residuals_ok)
        std::fprintf(stderr, "bench: residual threshold 1e-12 violated for dd >= 1\n");
    return residuals_ok ? 0 : 1;
}

int cmd_sweep_ratios(const CommonOpts& o, int threads, double r12_min, double r12_max,
                     int r12_steps, double r13_min, double r13_max, int r13_steps) {
    BandedMatrix a = generate_banded(o.n, o.kl, o.ku, o.dd, RngSeed{o.seed});
    DenseBlock f = random_block(o.n, o.nrhs, RngSeed{o.seed + 1});
    const auto [c12, c13] = resolve_ratios(o, std::max(o.kl, o.ku));

    struct Point {
        double r12, r13, tf, ts;
        bool calculated;
    };
    std::vector<Point> grid;
    auto run_point = [&](double r12, double r13, bool calc) {
        PartitionPlan plan = make_plan(o.n, o.kl, o.ku, threads, r12, r13);
        FactorOptions opts{o.pivot, o.boost_eps};
        SpikeFactorization fact = factorize(a, plan, opts);
        const double tf = median_seconds(3, [&] { fact = factorize(a, plan, opts); });
        DenseBlock x = solve(fact, f);
        const double ts = median_seconds(3, [&] { x = solve(fact, f); });
        grid.push_back({r12, r13, tf, ts, calc});
    };

    for (int i = 0; i < r12_steps; ++i)
        for (int j = 0; j < r13_steps; ++j) {
            const double r12 =
                r12_steps == 1 ? r12_min : r12_min + i * (r12_max - r12_min) / (r12_steps - 1);
            const double r13 =
                r13_steps == 1 ? r13_min : r13_min + j * (r13_max - r13_min) / (r13_steps - 1);
            run_point(r12, r13, false);
        }
    run_point(c12, c13, true);

    std::ofstream file;
    std::ostream& os = csv_stream(o.csv_path, file);
    os << "r12,r13,factor_seconds,solve_seconds,total_seconds,flag\n";
    char buf[256];
    for (const Point& p : grid) {
        std::snprintf(buf, sizeof buf, "%.4g,%.4g,%.6g,%.6g,%.6g,%s\n", p.r12, p.r13, p.tf, p.ts,
                      p.tf + p.ts, p.calculated ? "calculated" : "");
        os << buf;
    }

    const Point& calc = grid.back();
    auto best = [&](auto metric) {
        double b = metric(grid.front());
        for (const Point& p : grid) b = std::min(b, metric(p));
        return b;
    };
    const double bf = best([](const Point& p) { return p.tf; });
    const double bs = best([](const Point& p) { return p.ts; });
    const double bt = best([](const Point& p) { return p.tf + p.ts; });
    std::snprintf(buf, sizeof buf,
                  "# gain_from_best_measured: factor=%.2f%% solve=%.2f%% combined=%.2f%%\n",
                  100.0 * std::abs(calc.tf / bf - 1.0), 100.0 * std::abs(calc.ts / bs - 1.0),
                  100.0 * std::abs((calc.tf + calc.ts) / bt - 1.0));
    os << buf;
    return 0;
}

int cmd_accuracy(const CommonOpts& o, int threads) {
    struct Sample {
        double cond;
        double res_nopivot, res_pivot, res_oracle;
    };
    std::vector<Sample> rows;
    DenseBlock f = random_block(o.n, o.nrhs, RngSeed{o.seed + 1});

    auto eval_dd = [&](double dd) {
        BandedMatrix a = generate_banded(o.n, o.kl, o.ku, dd, RngSeed{o.seed});
        const double cond = condition_estimate_1norm(a);
        PartitionPlan plan = make_plan(o.n, o.kl, o.ku, threads, 1.0, 2.0);
        Sample s{};
        s.cond = cond;
        SpikeFactorization nopiv = factorize(a, plan, {false, o.boost_eps});
        s.res_nopivot = relative_residual(a, solve(nopiv, f), f);
        SpikeFactorization piv = factorize(a, plan, {true, o.boost_eps});
        s.res_pivot = relative_residual(a, solve(piv, f), f);
        s.res_oracle = relative_residual(a, oracle_solve(a, f, false, true), f);
        rows.push_back(s);
    };

    // Coarse sweep of the dominance knob, then bisect every determinant sign
    // change: the condition number blows up toward each crossing, which
    // fills in the high end of the range.
    std::vector<double> coarse;
    for (int i = 0; i <= 39; ++i)
        coarse.push_back(1.5 * std::pow(1e-3 / 1.5, i / 39.0));
    std::vector<int> signs;
    for (double dd : coarse) {
        eval_dd(dd);
        signs.push_back(oracle_det_sign(generate_banded(o.n, o.kl, o.ku, dd, RngSeed{o.seed})));
    }
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        if (signs[i] == signs[i + 1] || signs[i] == 0 || signs[i + 1] == 0) continue;
        double lo = coarse[i], hi = coarse[i + 1];
        int lo_sign = signs[i];
        for (int depth = 0; depth < 40; ++depth) {
            const double mid = 0.5 * (lo + hi);
            const int s = oracle_det_sign(generate_banded(o.n, o.kl, o.ku, mid, RngSeed{o.seed}));
            if (depth >= 12 && depth % 8 == 4) eval_dd(mid);
            if (s == 0) break;
            if (s == lo_sign)
                lo = mid;
            else
                hi = mid;
        }
        eval_dd(0.5 * (lo + hi));
    }

    std::ofstream file;
    std::ostream& os = csv_stream(o.csv_path, file);
    os << "cond,residual_spike_nopivot,residual_spike_pivot,residual_oracle_pivot\n";
    char buf[256];
    for (const Sample& s : rows) {
        std::snprintf(buf, sizeof buf, "%.3e,%.3e,%.3e,%.3e\n", s.cond, s.res_nopivot,
                      s.res_pivot, s.res_oracle);
        os << buf;
    }

    // thresholds for the invoked mode
    bool low_cond_ok = true, pivot_close_ok = true, nopivot_worse_somewhere = false;
    double span_lo = 1e300, span_hi = 0.0;
    for (const Sample& s : rows) {
        span_lo = std::min(span_lo, s.cond);
        span_hi = std::max(span_hi, s.cond);
        if (s.cond <= 1e5)
            low_cond_ok &= s.res_nopivot <= 1e-10 && s.res_pivot <= 1e-10 && s.res_oracle <= 1e-10;
        pivot_close_ok &= s.res_pivot <= 10.0 * s.res_oracle + 1e-15;
        if (s.cond >= 1e8 && s.res_nopivot >= 10.0 * s.res_pivot) nopivot_worse_somewhere = true;
    }
    std::fprintf(stderr, "# cond span: %.2e .. %.2e\n", span_lo, span_hi);
    std::fprintf(stderr, "# low-cond residuals <= 1e-10: %s\n", low_cond_ok ? "pass" : "FAIL");
    std::fprintf(stderr, "# pivoting spike within 10x of oracle: %s\n",
                 pivot_close_ok ? "pass" : "FAIL");
    std::fprintf(stderr, "# non-pivoting >= 10x worse somewhere above 1e8: %s\n",
                 nopivot_worse_somewhere ? "pass" : "FAIL");
    return (low_cond_ok && pivot_close_ok && nopivot_worse_somewhere) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPIKE banded solver harness"};
    app.require_subcommand(1);

    CommonOpts o;

    auto* gen = app.add_subcommand("gen", "generate a banded matrix file");
    std::string out = "matrix.spkb", format = "spkb";
    gen->add_option("--n", o.n, "matrix order")->required();
    add_band_flags(gen, o);
    gen->add_option("--out", out, "output path")->capture_default_str();
    gen->add_option("--format", format, "file format")
        ->check(CLI::IsMember({"mm", "spkb"}))
        ->capture_default_str();

    auto* cal = app.add_subcommand("calibrate", "measure the machine constant K");
    int cal_n = 0, cal_k = 16, cal_reps = 5;
    bool write_cache = false;
    cal->add_option("--n", cal_n, "sample size (0 = 200*k)");
    cal->add_option("--k", cal_k, "sample half-bandwidth")->capture_default_str();
    cal->add_option("--reps", cal_reps, "repetitions")->capture_default_str();
    cal->add_flag("--write-cache", write_cache, "persist K to the calibration cache");
    cal->add_option("--cache", o.cache_path, "calibration cache path");

    auto* bench = app.add_subcommand("bench", "time factor/solve stages per thread count");
    std::vector<int> threads{1, 2, 4};
    bench->add_option("--n", o.n, "matrix order")->required();
    add_band_flags(bench, o);
    bench->add_option("--nrhs", o.nrhs, "right-hand sides")->capture_default_str();
    bench->add_option("--threads", threads, "thread counts")->delimiter(',')->capture_default_str();
    bench->add_flag("--pivot", o.pivot, "partial pivoting");
    bench->add_flag("--transpose", o.transpose, "also time transpose solves");
    bench->add_option("--boost-eps", o.boost_eps, "diagonal boost magnitude scale");
    bench->add_option("--ratio-k", o.ratio_k, "override the machine constant K");
    bench->add_option("--r12", o.r12, "explicit partition ratio n1/n2");
    bench->add_option("--r13", o.r13, "explicit partition ratio n1/n3");
    bench->add_option("--cache", o.cache_path, "calibration cache path");
    bench->add_option("--csv", o.csv_path, "write CSV here instead of stdout");

    auto* sweep = app.add_subcommand("sweep-ratios", "time a grid of partition size ratios");
    int sw_threads = 4;
    double r12_min = 0.6, r12_max = 2.0, r13_min = 1.2, r13_max = 4.0;
    int r12_steps = 5, r13_steps = 5;
    sweep->add_option("--n", o.n, "matrix order")->required();
    add_band_flags(sweep, o);
    sweep->add_option("--nrhs", o.nrhs, "right-hand sides")->capture_default_str();
    sweep->add_option("--threads", sw_threads, "thread count")->capture_default_str();
    sweep->add_option("--r12-min", r12_min)->capture_default_str();
    sweep->add_option("--r12-max", r12_max)->capture_default_str();
    sweep->add_option("--r12-steps", r12_steps)->capture_default_str();
    sweep->add_option("--r13-min", r13_min)->capture_default_str();
    sweep->add_option("--r13-max", r13_max)->capture_default_str();
    sweep->add_option("--r13-steps", r13_steps)->capture_default_str();
    sweep->add_option("--ratio-k", o.ratio_k, "override the machine constant K");
    sweep->add_option("--cache", o.cache_path, "calibration cache path");
    sweep->add_option("--csv", o.csv_path, "write CSV here instead of stdout");

    auto* acc = app.add_subcommand("accuracy", "residual vs condition study per solver");
    int acc_threads = 2;
    acc->add_option("--n", o.n, "matrix order")->capture_default_str();
    add_band_flags(acc, o);
    acc->add_option("--nrhs", o.nrhs, "right-hand sides")->capture_default_str();
    acc->add_option("--threads", acc_threads, "thread count for the SPIKE solvers")
        ->capture_default_str();
    acc->add_option("--boost-eps", o.boost_eps, "diagonal boost magnitude scale");
    acc->add_option("--csv", o.csv_path, "write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            resolve_band(o);
            return cmd_gen(o, out, format);
        }
        if (*cal) return cmd_calibrate(cal_n, cal_k, cal_reps, write_cache, o.cache_path);
        if (*bench) {
            resolve_band(o);
            return cmd_bench(o, threads);
        }
        if (*sweep) {
            resolve_band(o);
            return cmd_sweep_ratios(o, sw_threads, r12_min, r12_max, r12_steps, r13_min, r13_max,
                                    r13_steps);
        }
        if (*acc) {
            if (o.n == 0) o.n = 2000;
            if (o.k < 0 && o.kl < 0) o.k = 8;
            resolve_band(o);
            return cmd_accuracy(o, acc_threads);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
