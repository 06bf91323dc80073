#include "spike/band_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spike {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'B'};

void put_i64(std::ostream& os, std::int64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::int64_t get_i64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("matrix file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<std::int64_t>(v);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_i64(os, static_cast<std::int64_t>(bits));
}

double get_f64(std::istream& is) {
    const std::uint64_t bits = static_cast<std::uint64_t>(get_i64(is));
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string next_data_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%') continue;
        return line;
    }
    throw std::runtime_error("matrix file truncated or empty");
}

BandedMatrix read_mm(std::istream& is, std::optional<int> ekl, std::optional<int> eku) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("empty matrix file");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate")
        throw std::runtime_error("unsupported Matrix Market header");
    if (field != "real" || symmetry != "general")
        throw std::runtime_error("expected real general coordinate matrix");

    std::istringstream sz(next_data_line(is));
    std::int64_t nrows = 0, ncols = 0, nnz = 0;
    sz >> nrows >> ncols >> nnz;
    if (!sz || nrows < 1 || nrows != ncols) throw std::runtime_error("bad matrix dimensions");

    struct Entry { int i, j; double v; };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(nnz));
    int kl = 0, ku = 0;
    for (std::int64_t e = 0; e < nnz; ++e) {
        std::istringstream ls(next_data_line(is));
        std::int64_t i = 0, j = 0;
        double v = 0.0;
        ls >> i >> j >> v;
        if (!ls || i < 1 || j < 1 || i > nrows || j > ncols)
            throw std::runtime_error("malformed coordinate entry");
        const int di = static_cast<int>(i - 1), dj = static_cast<int>(j - 1);
        kl = std::max(kl, di - dj);
        ku = std::max(ku, dj - di);
        entries.push_back({di, dj, v});
    }
    if (ekl && kl > *ekl)
        throw std::runtime_error("coordinate entry below the declared band");
    if (eku && ku > *eku)
        throw std::runtime_error("coordinate entry above the declared band");
    if (ekl) kl = *ekl;
    if (eku) ku = *eku;
    BandedMatrix a(static_cast<int>(nrows), kl, ku);
    for (const Entry& e : entries) a.set(e.i, e.j, e.v);
    return a;
}

BandedMatrix read_spkb(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad SPKB magic");
    const std::int64_t n = get_i64(is), kl = get_i64(is), ku = get_i64(is);
    if (n < 1 || kl < 0 || ku < 0 || kl >= n || ku >= n)
        throw std::runtime_error("bad SPKB dimensions");
    BandedMatrix a(static_cast<int>(n), static_cast<int>(kl), static_cast<int>(ku));
    for (double& v : a.data()) v = get_f64(is);
    if (!is) throw std::runtime_error("SPKB file truncated");
    return a;
}

} // namespace

void write_matrix(const BandedMatrix& a, const std::string& path, MatrixFormat fmt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    if (fmt == MatrixFormat::Spkb) {
        os.write(kMagic, 4);
        put_i64(os, a.n());
        put_i64(os, a.kl());
        put_i64(os, a.ku());
        for (double v : a.data()) put_f64(os, v);
    } else {
        std::int64_t nnz = 0;
        for (int j = 0; j < a.n(); ++j) {
            const int i0 = std::max(0, j - a.ku());
            const int i1 = std::min(a.n() - 1, j + a.kl());
            nnz += i1 - i0 + 1;
        }
        os << "%%MatrixMarket matrix coordinate real general\n";
        os << a.n() << ' ' << a.n() << ' ' << nnz << '\n';
        char buf[64];
        for (int j = 0; j < a.n(); ++j) {
            const int i0 = std::max(0, j - a.ku());
            const int i1 = std::min(a.n() - 1, j + a.kl());
            for (int i = i0; i <= i1; ++i) {
                std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, j + 1, a.at(i, j));
                os << buf;
            }
        }
    }
    if (!os) throw std::runtime_error("write to " + path + " failed");
}

BandedMatrix read_matrix(const std::string& path, std::optional<int> expected_kl,
                         std::optional<int> expected_ku) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char head[4] = {0, 0, 0, 0};
    is.read(head, 4);
    if (is.gcount() == 0) throw std::runtime_error("empty matrix file");
    is.seekg(0);
    if (std::memcmp(head, kMagic, 4) == 0) return read_spkb(is);
    return read_mm(is, expected_kl, expected_ku);
}

void write_dense(const DenseBlock& b, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "%%MatrixMarket matrix array real general\n";
    os << b.rows << ' ' << b.cols << '\n';
    char buf[64];
    for (int j = 0; j < b.cols; ++j)
        for (int i = 0; i < b.rows; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g\n", b.at(i, j));
            os << buf;
        }
    if (!os) throw std::runtime_error("write to " + path + " failed");
}

DenseBlock read_dense(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("empty file");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || format != "array" || field != "real")
        throw std::runtime_error("expected real array Matrix Market file");
    std::istringstream sz(next_data_line(is));
    std::int64_t rows = 0, cols = 0;
    sz >> rows >> cols;
    if (!sz || rows < 0 || cols < 0) throw std::runtime_error("bad array dimensions");
    DenseBlock b(static_cast<int>(rows), static_cast<int>(cols));
    for (double& v : b.data) {
        std::istringstream ls(next_data_line(is));
        ls >> v;
        if (!ls) throw std::runtime_error("malformed array value");
    }
    return b;
}

} // namespace spike
