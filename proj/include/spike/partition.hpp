#pragma once

#include <optional>
#include <string>
#include <vector>

namespace spike {

enum class PartitionKind { FirstLast, InnerSingle, InnerDual };

/// Thread-to-partition distribution plus the partition row bounds.
///
/// p is a power of two; the first and last partitions always run on a single
/// thread, extra threads beyond p become dual-thread inner partitions
/// allocated from the second partition onward. With t threads and p = 2^m,
/// the usable range is 2^m <= t <= 2^(m+1)-2; at t = 2^(m+1)-1 one thread
/// stays idle.
struct PartitionPlan {
    int p = 1;
    std::vector<int> bounds;          // p+1 row offsets, bounds[0] = 0
    std::vector<PartitionKind> kinds; // p entries
    int threads_used = 1;
    int idle_threads = 0;
    double r12 = 1.0, r13 = 2.0;

    int n() const { return bounds.empty() ? 0 : bounds.back(); }
    int size(int i) const { return bounds[i + 1] - bounds[i]; }
    int dual_count() const;
    int single_count() const;
};

/// Machine-specific solve-to-factor cost ratio K = K2/K1.
struct TuningConstant {
    double k = 1.0;
};

/// Plan skeleton for t threads: partition count, kinds, idle count. No
/// bounds yet. cap_p limits the partition count (used when a plan degrades).
PartitionPlan distribute_threads(int t, int cap_p = 0);

/// Load-balancing ratios (R12, R13) for a given K and n_rhs/k mix:
///   R13 = 1/(1 + K*rho) + (3/2 + 2*rho)/(1/K + rho),  rho = n_rhs/k,
///   R12 = R13/2.
/// Limits: rho -> 0 gives R12 = 1/2 + (3/4)K; rho -> inf gives (1, 2).
std::pair<double, double> compute_ratios(double k_const, int n_rhs, int k);

/// Partition sizes from the ratios. Inner rounding remainders land on the
/// first partition; the sizes always sum to n exactly. Throws
/// std::domain_error when some partition would undercut its minimum
/// (min_single for single-thread partitions, min_dual for dual ones).
std::vector<int> compute_sizes(int n, const PartitionPlan& skeleton, double r12, double r13,
                               int min_single, int min_dual);

/// Full plan for a matrix: distributes threads, sizes partitions and halves
/// p until every partition clears its minimum (down to a serial plan).
PartitionPlan make_plan(int n, int kl, int ku, int t, double r12, double r13);

struct CalibrationResult {
    double k = 1.0;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
    bool timer_warning = false; // sample too small for the clock
};

/// Times a serial non-pivoting factorization and a two-sweep solve with
/// n_rhs = k_sample on a generated matrix; K is the median of `reps` ratios.
/// n_sample defaults to 200*k_sample when 0.
CalibrationResult calibrate_k(int n_sample, int k_sample, int reps = 5);

/// Calibration cache: a key-value text file holding "K <value>". The
/// default location is $SPIKE_K_CACHE or ./spike_k.cache.
std::string default_k_cache_path();
void write_k_cache(const std::string& path, double k);
std::optional<double> read_k_cache(const std::string& path);

} // namespace spike
