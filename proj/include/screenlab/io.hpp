#pragma once

// File formats.
//
// DSMX: "DSMX" magic, u32 version (= 1), u64 rows, u64 cols, then rows*cols
//       little-endian IEEE-754 float64 values in row-major order.
// CSV:  one matrix row per line, comma separated.
// Groups: one line per group, "weight;i1,i2,..." with 0-based column indices.
//       The weight may be omitted ("i1,i2,..." or ";i1,...") and then
//       defaults to sqrt(group size).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "screenlab/dictionary.hpp"

namespace screenlab::io {

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Row-major dense matrix as stored on disk.
struct Matrix {
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> values;  // row-major
};

void write_dsmx(const std::filesystem::path& path, const Matrix& m);
Matrix read_dsmx(const std::filesystem::path& path);
Matrix read_csv(const std::filesystem::path& path);
/// DSMX when the file starts with the magic, CSV otherwise.
Matrix read_matrix(const std::filesystem::path& path);

Matrix to_matrix(const Dictionary& d);
/// N x 1 column.
Matrix to_matrix(const Vector& v);
Dictionary to_dictionary(const Matrix& m, bool check_unit_norm = true);
/// Accepts N x 1 or 1 x N.
Vector to_vector(const Matrix& m);

struct GroupSpec {
    std::vector<IndexSet> groups;
    std::vector<double> weights;  // missing weights already defaulted
};

GroupSpec read_groups(const std::filesystem::path& path);
/// One `weight;i1,i2,...` line per group, preceded by `# <comment>` if given.
void write_groups(const std::filesystem::path& path, const GroupPartition& partition,
                  std::string_view comment = {});
GroupPartition load_partition(const std::filesystem::path& path, const Dictionary& d);

}  // namespace screenlab::io
