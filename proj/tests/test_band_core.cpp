#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spike/band_io.hpp"
#include "spike/band_ops.hpp"
#include "spike/generate.hpp"
#include "spike/oracle.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

using namespace spike;

TEST_CASE("banded matrix storage and band access") {
    BandedMatrix a(5, 1, 2);
    CHECK(a.data().size() == 4 * 5);
    a.set(1, 0, 3.0);
    CHECK(a.at(1, 0) == 3.0);
    CHECK(a.at(4, 0) == 0.0);               // outside band reads zero
    CHECK_THROWS(a.set(4, 0, 1.0));         // and is never writable
    CHECK_THROWS(BandedMatrix(3, 3, 0));    // kl must stay below n
    CHECK_THROWS(a.at(5, 0));
}

TEST_CASE("generator: empty band n=1 gets zero diagonal") {
    BandedMatrix a = generate_banded(1, 0, 0, 1.5, RngSeed{7});
    CHECK(a.at(0, 0) == 0.0);
    CHECK(std::isinf(degree_of_diagonal_dominance(a)));
}

TEST_CASE("generator: measured DD equals the requested dd") {
    BandedMatrix a = generate_banded(4, 1, 1, 1.5, RngSeed{3});
    CHECK(degree_of_diagonal_dominance(a) == doctest::Approx(1.5).epsilon(1e-13));
    BandedMatrix b = generate_banded(100, 5, 5, 0.001, RngSeed{11});
    CHECK(degree_of_diagonal_dominance(b) == doctest::Approx(0.001).epsilon(1e-12));
}

TEST_CASE("generator: deterministic in the seed") {
    BandedMatrix a = generate_banded(40, 3, 2, 1.2, RngSeed{99});
    BandedMatrix b = generate_banded(40, 3, 2, 1.2, RngSeed{99});
    CHECK(a.data() == b.data());
    BandedMatrix c = generate_banded(40, 3, 2, 1.2, RngSeed{100});
    CHECK(a.data() != c.data());
}

TEST_CASE("degree of diagonal dominance direct arithmetic") {
    // diagonal 2, single off-diagonal entry 1 per column
    BandedMatrix a(4, 1, 0);
    for (int j = 0; j < 4; ++j) a.set(j, j, 2.0);
    for (int j = 0; j < 3; ++j) a.set(j + 1, j, 1.0);
    CHECK(degree_of_diagonal_dominance(a) == doctest::Approx(2.0));
    CHECK(std::isinf(degree_of_diagonal_dominance(BandedMatrix::identity(6))));
}

TEST_CASE("band_matmul identity and symmetry") {
    DenseBlock x = random_block(9, 3, RngSeed{5});
    DenseBlock y = band_matmul(BandedMatrix::identity(9), x);
    CHECK(testutil::max_abs_diff(x, y) == 0.0);

    // symmetric matrix: transpose product equals forward product
    BandedMatrix s(8, 2, 2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int j = 0; j < 8; ++j)
        for (int i = j; i <= std::min(7, j + 2); ++i) {
            const double v = uni(rng);
            s.set(i, j, v);
            if (i != j) s.set(j, i, v);
        }
    DenseBlock f = random_block(8, 2, RngSeed{23});
    CHECK(testutil::max_abs_diff(band_matmul(s, f, false), band_matmul(s, f, true)) < 1e-14);
}

TEST_CASE("band_matmul matches dense reference") {
    // fixed case from the interface examples
    BandedMatrix a = generate_banded(8, 2, 2, 1.0, RngSeed{4});
    DenseBlock x = random_block(8, 3, RngSeed{6});
    DenseBlock ref = testutil::dense_matmul(testutil::densify(a), x);
    CHECK(testutil::rel_componentwise(band_matmul(a, x), ref) < 1e-15);

    // property sweep over shapes, both transpose flags
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 60; ++iter) {
        const int n = 1 + static_cast<int>(rng() % 32);
        const int kl = static_cast<int>(rng() % std::min(n, 5));
        const int ku = static_cast<int>(rng() % std::min(n, 5));
        const int nrhs = 1 + static_cast<int>(rng() % 4);
        BandedMatrix m = generate_banded(n, kl, ku, 0.7, RngSeed{rng()});
        DenseBlock xx = random_block(n, nrhs, RngSeed{rng()});
        DenseBlock d = testutil::densify(m);
        const bool tr = iter % 2 == 0;
        DenseBlock ref2 = testutil::dense_matmul(d, xx, tr);
        CHECK(testutil::rel_componentwise(band_matmul(m, xx, tr), ref2) < 1e-14);
    }
}

TEST_CASE("relative residual definition and edge cases") {
    BandedMatrix d(5, 0, 0);
    for (int j = 0; j < 5; ++j) d.set(j, j, 2.0);
    DenseBlock f = random_block(5, 2, RngSeed{8});
    DenseBlock x = f;
    for (double& v : x.data) v /= 2.0;
    CHECK(relative_residual(d, x, f) <= 1e-16);

    DenseBlock zero(5, 2);
    CHECK(relative_residual(d, zero, f) == doctest::Approx(1.0)); // ||F||/||F||
    CHECK(relative_residual(d, zero, zero) == 0.0);
    CHECK_THROWS_AS(relative_residual(d, x, zero), std::domain_error);
}

TEST_CASE("oracle: identity and hand-solved 2x2") {
    DenseBlock f = random_block(6, 2, RngSeed{21});
    CHECK(testutil::max_abs_diff(oracle_solve(BandedMatrix::identity(6), f), f) == 0.0);

    BandedMatrix a(2, 1, 1);
    a.set(0, 0, 2.0);
    a.set(0, 1, 1.0);
    a.set(1, 0, 1.0);
    a.set(1, 1, 2.0);
    DenseBlock rhs(2, 1);
    rhs.at(0, 0) = 3.0;
    rhs.at(1, 0) = 3.0;
    DenseBlock x = oracle_solve(a, rhs);
    CHECK(x.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x.at(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("oracle: residual self-check on random systems") {
    BandedMatrix a = generate_banded(64, 3, 3, 1.5, RngSeed{31});
    DenseBlock f = random_block(64, 4, RngSeed{32});
    for (bool piv : {false, true})
        for (bool tr : {false, true})
            CHECK(relative_residual(a, oracle_solve(a, f, tr, piv), f, tr) < 1e-13);

    BandedMatrix big = generate_banded(500, 10, 10, 1.5, RngSeed{41});
    DenseBlock bf = random_block(500, 2, RngSeed{42});
    CHECK(relative_residual(big, oracle_solve(big, bf), bf) < 1e-13);
}

TEST_CASE("oracle: exact zero pivot in pivoting mode is a singularity error") {
    BandedMatrix z(3, 1, 1); // column 0 entirely zero
    z.set(1, 1, 1.0);
    z.set(2, 2, 1.0);
    DenseBlock f = random_block(3, 1, RngSeed{50});
    CHECK_THROWS(oracle_solve(z, f, false, true));
}

TEST_CASE("oracle det sign and condition estimate behave") {
    BandedMatrix a = generate_banded(50, 2, 2, 1.5, RngSeed{61});
    CHECK(oracle_det_sign(a) != 0);
    const double c = condition_estimate_1norm(a);
    CHECK(c >= 1.0);
    CHECK(c < 1e4); // diagonally dominant: well conditioned
}

TEST_CASE("matrix io round trips bit-exactly") {
    BandedMatrix a = generate_banded(23, 2, 4, 1.3, RngSeed{71});
    for (MatrixFormat fmt : {MatrixFormat::Spkb, MatrixFormat::MatrixMarket}) {
        const std::string path = fmt == MatrixFormat::Spkb ? "roundtrip.spkb" : "roundtrip.mtx";
        write_matrix(a, path, fmt);
        BandedMatrix b = read_matrix(path);
        REQUIRE(b.n() == a.n());
        // Matrix Market infers the band from entries; zero sub/superdiagonal
        // tails may shrink it, so compare entrywise.
        for (int j = 0; j < a.n(); ++j)
            for (int i = 0; i < a.n(); ++i) CHECK(a.at(i, j) == b.at(i, j));
        std::remove(path.c_str());
    }
}

TEST_CASE("dense block io round trips") {
    DenseBlock b = random_block(7, 3, RngSeed{81});
    write_dense(b, "roundtrip_dense.mtx");
    DenseBlock c = read_dense("roundtrip_dense.mtx");
    CHECK(testutil::max_abs_diff(b, c) == 0.0);
    std::remove("roundtrip_dense.mtx");
}

TEST_CASE("matrix io rejects malformed input") {
    {
        std::ofstream os("bad_empty.mtx");
    }
    CHECK_THROWS(read_matrix("bad_empty.mtx"));
    std::remove("bad_empty.mtx");

    {
        std::ofstream os("bad_band.mtx");
        os << "%%MatrixMarket matrix coordinate real general\n";
        os << "4 4 2\n1 1 1.0\n4 1 5.0\n";
    }
    // entry (4,1) sits three diagonals below the main one
    CHECK_THROWS(read_matrix("bad_band.mtx", 1, 1));
    CHECK_NOTHROW(read_matrix("bad_band.mtx")); // inferred band accepts it
    std::remove("bad_band.mtx");

    {
        std::ofstream os("bad_trunc.spkb");
        os << "SPKB";
    }
    CHECK_THROWS(read_matrix("bad_trunc.spkb"));
    std::remove("bad_trunc.spkb");
}
