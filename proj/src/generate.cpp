#include "spike/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace spike {

BandedMatrix generate_banded(int n, int kl, int ku, double dd, RngSeed seed) {
    if (dd <= 0.0) throw std::invalid_argument("generate_banded: dd must be > 0");
    BandedMatrix a(n, kl, ku);
    std::mt19937_64 rng(seed.value);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        const int lo = std::max(0, j - ku);
        const int hi = std::min(n - 1, j + kl);
        double colsum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            if (i == j) continue;
            const double v = uni(rng);
            a.set(i, j, v);
            colsum += v;
        }
        a.set(j, j, dd * colsum);
    }
    return a;
}

double degree_of_diagonal_dominance(const BandedMatrix& a) {
    const int n = a.n();
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
        const int lo = std::max(0, j - a.ku());
        const int hi = std::min(n - 1, j + a.kl());
        double off = 0.0;
        for (int i = lo; i <= hi; ++i)
            if (i != j) off += std::abs(a.at(i, j));
        if (off == 0.0) continue;
        best = std::min(best, std::abs(a.at(j, j)) / off);
    }
    return best;
}

DenseBlock random_block(int rows, int cols, RngSeed seed) {
    DenseBlock b(rows, cols);
    std::mt19937_64 rng(seed.value);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : b.data) v = uni(rng);
    return b;
}

} // namespace spike
