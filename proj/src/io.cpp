#include "screenlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

namespace screenlab::io {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'S', 'M', 'X'};
constexpr std::uint32_t kVersion = 1;


template <typename T>
void put_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
        throw FormatError("DSMX: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view tok, const std::string& where) {
    tok = trim(tok);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw FormatError(where + ": cannot parse number '" + std::string(tok) + "'");
    return v;
}

std::size_t parse_index(std::string_view tok, const std::string& where) {
    tok = trim(tok);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
        throw FormatError(where + ": cannot parse index '" + std::string(tok) + "'");
    return v;
}

}  // namespace

void write_dsmx(const std::filesystem::path& path, const Matrix& m) {
    if (m.values.size() != m.rows * m.cols) throw DimensionError("write_dsmx: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint64_t>(os, m.rows);
    put_le<std::uint64_t>(os, m.cols);
    for (double v : m.values) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_dsmx(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic)
        throw FormatError("DSMX: bad magic in " + path.string());
    const auto version = get_le<std::uint32_t>(is);
    if (version != kVersion)
        throw FormatError("DSMX: unsupported version " + std::to_string(version));
    Matrix m;
    m.rows = get_le<std::uint64_t>(is);
    m.cols = get_le<std::uint64_t>(is);
    const auto expected = std::filesystem::file_size(path);
    if (expected != 24 + 8 * m.rows * m.cols) throw FormatError("DSMX: size does not match header");
    m.values.resize(m.rows * m.cols);
    for (double& v : m.values) v = std::bit_cast<double>(get_le<std::uint64_t>(is));
    return m;
}

Matrix read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    Matrix m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::size_t count = 0;
        std::size_t start = 0;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        while (true) {
            const auto comma = body.find(',', start);
            m.values.push_back(parse_double(body.substr(start, comma - start), where));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (m.rows == 0) m.cols = count;
        else if (count != m.cols) throw FormatError(where + ": ragged row");
        ++m.rows;
    }
    if (m.rows == 0) throw FormatError("CSV: no data in " + path.string());
    return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (is.gcount() == 4 && magic == kMagic) return read_dsmx(path);
    return read_csv(path);
}

Matrix to_matrix(const Dictionary& d) {
    Matrix m{d.rows(), d.cols(), std::vector<double>(d.rows() * d.cols())};
    for (std::size_t j = 0; j < d.cols(); ++j)
        for (std::size_t i = 0; i < d.rows(); ++i) m.values[i * d.cols() + j] = d(i, j);
    return m;
}

Matrix to_matrix(const Vector& v) { return Matrix{v.size(), 1, v}; }

Dictionary to_dictionary(const Matrix& m, bool check_unit_norm) {
    return Dictionary::from_row_major(m.rows, m.cols, m.values, check_unit_norm);
}

Vector to_vector(const Matrix& m) {
    if (m.rows != 1 && m.cols != 1) throw DimensionError("expected a single row or column");
    return m.values;
}

GroupSpec read_groups(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    GroupSpec spec;
    std::vector<double> weights;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::optional<double> weight;
        if (const auto semi = body.find(';'); semi != std::string_view::npos) {
            const auto w = trim(body.substr(0, semi));
            if (!w.empty()) weight = parse_double(w, where);
            body = body.substr(semi + 1);
        }
        std::vector<std::size_t> idx;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            idx.push_back(parse_index(body.substr(start, comma - start), where));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        std::sort(idx.begin(), idx.end());
        if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
            throw FormatError(where + ": duplicate index in group");
        const double size = static_cast<double>(idx.size());
        spec.groups.emplace_back(std::move(idx));
        if (weight) weights.push_back(*weight);
        else
            weights.push_back(std::sqrt(size));
    }
    spec.weights = std::move(weights);
    return spec;
}

void write_groups(const std::filesystem::path& path, const GroupPartition& partition,
                  std::string_view comment) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    if (!comment.empty()) os << "# " << comment << '\n';
    os << std::setprecision(17);
    for (std::size_t g = 0; g < partition.size(); ++g) {
        os << partition.weight(g) << ';';
        bool first = true;
        for (std::size_t i : partition.group(g)) {
            if (!first) os << ',';
            os << i;
            first = false;
        }
        os << '\n';
    }
}

GroupPartition load_partition(const std::filesystem::path& path, const Dictionary& d) {
    auto spec = read_groups(path);
    return GroupPartition(d, std::move(spec.groups), std::move(spec.weights));
}

}  // namespace screenlab::io
