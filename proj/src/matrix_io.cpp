#include "kernmoment/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace kernmoment {

namespace {

constexpr std::array<char, 4> kMagic{'K', 'M', 'M', '1'};

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::array<unsigned char, sizeof(T)> b;
        std::memcpy(b.data(), &v, sizeof(T));
        std::reverse(b.begin(), b.end());
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }
}

template <typename T>
void put(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw IoError("truncated KMM1 file: " + path.string());
    return to_little(v);
}

bool has_binary_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return ext == ".bin" || ext == ".kmm";
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    std::array<char, 64> buf;
    std::string line;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) line.push_back(',');
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), m(i, j),
                                     std::chars_format::general, 17);
            line.append(buf.data(), res.ptr);
        }
        line.push_back('\n');
        os << line;
    }
    if (!os) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::vector<double> values;
    Eigen::Index cols = -1, rows = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Eigen::Index count = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            const char* b = p;
            while (b < comma && *b == ' ') ++b;
            double v = 0.0;
            auto res = std::from_chars(b, comma, v);
            if (res.ec != std::errc() )
                throw IoError("malformed number in " + path.string() + " at row " + std::to_string(rows));
            for (const char* r = res.ptr; r < comma; ++r)
                if (*r != ' ')
                    throw IoError("malformed number in " + path.string() + " at row " + std::to_string(rows));
            values.push_back(v);
            ++count;
            p = comma + 1;
        }
        if (cols < 0) cols = count;
        if (count != cols) throw IoError("ragged rows in " + path.string());
        ++rows;
    }
    if (rows == 0) throw IoError("empty matrix file: " + path.string());
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

void write_matrix_kmm1(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write(kMagic.data(), kMagic.size());
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) put<double>(os, m.data()[i]);
    if (!os) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_kmm1(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic)
        throw IoError("not a KMM1 file: " + path.string());
    const auto p = get<std::uint64_t>(is, path);
    const auto q = get<std::uint64_t>(is, path);
    if (p == 0 || q == 0 || p > (1ULL << 32) || q > (1ULL << 32))
        throw IoError("implausible KMM1 dimensions in " + path.string());
    Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(is, path);
    if (is.peek() != std::char_traits<char>::eof())
        throw IoError("trailing bytes in KMM1 file: " + path.string());
    return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    if (has_binary_extension(path))
        write_matrix_kmm1(path, m);
    else
        write_matrix_csv(path, m);
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (is.gcount() == 4 && magic == kMagic) return read_matrix_kmm1(path);
    return read_matrix_csv(path);
}

}  // namespace kernmoment
