#include "spike/partition.hpp"

#include "spike/generate.hpp"
#include "spike/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace spike {

int PartitionPlan::dual_count() const {
    return static_cast<int>(std::count(kinds.begin(), kinds.end(), PartitionKind::InnerDual));
}

int PartitionPlan::single_count() const {
    return p - dual_count();
}

PartitionPlan distribute_threads(int t, int cap_p) {
    if (t < 1) throw std::invalid_argument("distribute_threads: t must be >= 1");
    PartitionPlan plan;
    int p = 1;
    while (2 * p <= t) p *= 2;
    if (cap_p > 0) p = std::min(p, cap_p);
    plan.p = p;
    plan.kinds.assign(p, PartitionKind::InnerSingle);
    if (p == 1) {
        plan.kinds[0] = PartitionKind::FirstLast;
        plan.threads_used = 1;
        plan.idle_threads = t - 1;
        return plan;
    }
    plan.kinds.front() = PartitionKind::FirstLast;
    plan.kinds.back() = PartitionKind::FirstLast;
    const int extra = std::min(t - p, p - 2);
    for (int i = 0; i < extra; ++i) plan.kinds[1 + i] = PartitionKind::InnerDual;
    plan.threads_used = p + extra;
    plan.idle_threads = t - plan.threads_used;
    return plan;
}

std::pair<double, double> compute_ratios(double k_const, int n_rhs, int k) {
    if (k_const <= 0.0) throw std::invalid_argument("compute_ratios: K must be > 0");
    if (k < 1) throw std::invalid_argument("compute_ratios: k must be >= 1");
    if (n_rhs < 0) throw std::invalid_argument("compute_ratios: n_rhs must be >= 0");
    const double rho = static_cast<double>(n_rhs) / k;
    const double r13 = 1.0 / (1.0 + k_const * rho) + (1.5 + 2.0 * rho) / (1.0 / k_const + rho);
    return {r13 / 2.0, r13};
}

std::vector<int> compute_sizes(int n, const PartitionPlan& skeleton, double r12, double r13,
                               int min_single, int min_dual) {
    const int p = skeleton.p;
    if (p == 1) {
        if (n < min_single) throw std::domain_error("compute_sizes: matrix too small");
        return {n};
    }
    const int x = skeleton.dual_count();
    const int y = skeleton.single_count() - 2;
    const double denom = 2.0 * r12 * r13 + x * r13 + y * r12;
    const double n1 = n * r12 * r13 / denom;
    const double n2 = n1 / r12;
    const double n3 = n1 / r13;

    std::vector<int> sizes(p);
    long long rest = 0;
    for (int i = 1; i < p; ++i) {
        double want = n1;
        if (skeleton.kinds[i] == PartitionKind::InnerDual) want = n2;
        else if (skeleton.kinds[i] == PartitionKind::InnerSingle) want = n3;
        sizes[i] = static_cast<int>(std::llround(want));
        rest += sizes[i];
    }
    sizes[0] = static_cast<int>(n - rest);

    for (int i = 0; i < p; ++i) {
        const int need = skeleton.kinds[i] == PartitionKind::InnerDual ? min_dual : min_single;
        if (sizes[i] < need)
            throw std::domain_error("compute_sizes: partition below its minimum size");
    }
    return sizes;
}

PartitionPlan make_plan(int n, int kl, int ku, int t, double r12, double r13) {
    const int khat = std::max(kl, ku);
    const int min_single = 2 * khat + 1;
    const int min_dual = std::max(min_single, 2 * (kl + ku + 1));
    PartitionPlan base = distribute_threads(t);
    for (int p = base.p; p >= 1; p /= 2) {
        PartitionPlan plan = distribute_threads(t, p);
        plan.r12 = r12;
        plan.r13 = r13;
        try {
            std::vector<int> sizes = compute_sizes(n, plan, r12, r13, min_single, min_dual);
            plan.bounds.resize(plan.p + 1);
            plan.bounds[0] = 0;
            for (int i = 0; i < plan.p; ++i) plan.bounds[i + 1] = plan.bounds[i] + sizes[i];
            return plan;
        } catch (const std::domain_error&) {
            if (p == 1) break;
        }
    }
    // Serial fallback: one partition regardless of band.
    PartitionPlan plan;
    plan.p = 1;
    plan.kinds = {PartitionKind::FirstLast};
    plan.bounds = {0, n};
    plan.threads_used = 1;
    plan.idle_threads = t - 1;
    plan.r12 = r12;
    plan.r13 = r13;
    return plan;
}

CalibrationResult calibrate_k(int n_sample, int k_sample, int reps) {
    if (k_sample < 1) throw std::invalid_argument("calibrate_k: k_sample must be >= 1");
    if (n_sample <= 0) n_sample = 200 * k_sample;
    using clock = std::chrono::steady_clock;
    CalibrationResult out;
    BandedMatrix a = generate_banded(n_sample, k_sample, k_sample, 1.5, RngSeed{1234});
    DenseBlock f = random_block(n_sample, k_sample, RngSeed{5678});
    std::vector<double> ratios;
    double tf_total = 0.0, ts_total = 0.0;
    for (int rep = 0; rep < std::max(reps, 1); ++rep) {
        const auto t0 = clock::now();
        LUFactors lu(a, false, default_boost_eps());
        const auto t1 = clock::now();
        DenseBlock x = f;
        lu.solve_inplace(x.view(), false, nullptr);
        const auto t2 = clock::now();
        const double tf = std::chrono::duration<double>(t1 - t0).count();
        const double ts = std::chrono::duration<double>(t2 - t1).count();
        tf_total += tf;
        ts_total += ts;
        ratios.push_back(ts / std::max(tf, 1e-12));
    }
    std::sort(ratios.begin(), ratios.end());
    out.k = ratios[ratios.size() / 2];
    out.factor_seconds = tf_total / std::max(reps, 1);
    out.solve_seconds = ts_total / std::max(reps, 1);
    out.timer_warning = (tf_total + ts_total) < 0.010;
    return out;
}

std::string default_k_cache_path() {
    if (const char* env = std::getenv("SPIKE_K_CACHE")) return env;
    return "spike_k.cache";
}

void write_k_cache(const std::string& path, double k) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write calibration cache " + path);
    os.precision(17);
    os << "K " << k << "\n";
}

std::optional<double> read_k_cache(const std::string& path) {
    std::ifstream is(path);
    if (!is) return std::nullopt;
    std::string key;
    double v = 0.0;
    while (is >> key >> v)
        if (key == "K") return v;
    return std::nullopt;
}

} // namespace spike
