#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace screenlab {

using Vector = std::vector<double>;

/// Thrown on shape mismatches between dictionaries, vectors and index sets.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Strictly increasing list of column indices.
class IndexSet {
  public:
    IndexSet() = default;
    IndexSet(std::initializer_list<std::size_t> idx);
    /// Throws std::invalid_argument unless `idx` is strictly increasing.
    explicit IndexSet(std::vector<std::size_t> idx);

    /// {0, 1, ..., n-1}
    static IndexSet range(std::size_t n);

    std::size_t size() const noexcept { return idx_.size(); }
    bool empty() const noexcept { return idx_.empty(); }
    std::size_t operator[](std::size_t k) const noexcept { return idx_[k]; }
    auto begin() const noexcept { return idx_.begin(); }
    auto end() const noexcept { return idx_.end(); }
    const std::vector<std::size_t>& indices() const noexcept { return idx_; }

    bool contains(std::size_t i) const;
    bool is_subset_of(const IndexSet& other) const;
    /// [0, universe) minus this set.
    IndexSet complement(std::size_t universe) const;
    IndexSet set_union(const IndexSet& other) const;
    /// Positions of `sub`'s elements inside this set. `sub` must be a subset.
    std::vector<std::size_t> positions_of(const IndexSet& sub) const;

    friend bool operator==(const IndexSet&, const IndexSet&) = default;

  private:
    std::vector<std::size_t> idx_;
};

/// Dense N x K matrix of atoms, stored column-major, with the original index of
/// every column it still holds. Reductions keep original-index order.
class Dictionary {
  public:
    static constexpr double kUnitNormTolerance = 1e-9;

    Dictionary() = default;
    /// `col_major` holds rows*cols values, column after column.
    Dictionary(std::size_t rows, std::size_t cols, std::vector<double> col_major,
               bool check_unit_norm = true);

    static Dictionary from_row_major(std::size_t rows, std::size_t cols,
                                     std::span<const double> row_major,
                                     bool check_unit_norm = true);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool col_norm_checked() const noexcept { return col_norm_checked_; }

    std::span<const double> column(std::size_t j) const {
        return {data_.data() + j * rows_, rows_};
    }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
    std::span<const double> data() const noexcept { return data_; }

    /// Original index of each held column (identity for a fresh dictionary).
    const IndexSet& original_columns() const noexcept { return original_; }

    /// D x
    Vector apply(std::span<const double> x) const;
    void apply_into(std::span<const double> x, std::span<double> out) const;
    /// D x touching only the nonzero entries of x.
    void apply_sparse_into(std::span<const double> x, std::span<double> out) const;

    /// D^T v
    Vector correlate(std::span<const double> v) const;
    void correlate_into(std::span<const double> v, std::span<double> out) const;

    /// Keep the columns at the given (strictly increasing) local positions.
    void retain_columns(std::span<const std::size_t> positions);

    /// Copy of the columns at the given local positions.
    Dictionary select_columns(std::span<const std::size_t> positions) const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
    IndexSet original_;
    bool col_norm_checked_ = false;
};

/// Sub-dictionary with columns `kept_next` of a dictionary whose columns are
/// `kept_prev`. Throws unless kept_next is a subset of kept_prev.
Dictionary reduce(const Dictionary& d_prev, const IndexSet& kept_prev,
                  const IndexSet& kept_next);

struct PowerIterationOptions {
    double tolerance = 1e-10;
    std::size_t max_iters = 5000;
};

/// Largest singular value of D restricted to `cols` (local column positions).
double spectral_norm(const Dictionary& d, const IndexSet& cols,
                     PowerIterationOptions opt = {});

/// Largest singular value of the whole dictionary.
double spectral_norm(const Dictionary& d, PowerIterationOptions opt = {});

/// A partition of the dictionary's columns with per-group weights and the
/// spectral norm of each sub-dictionary.
class GroupPartition {
  public:
    GroupPartition() = default;

    /// Validates that `groups` partitions [0, d.cols()) and precomputes
    /// spectral norms. Missing weights default to sqrt(|g|).
    GroupPartition(const Dictionary& d, std::vector<IndexSet> groups,
                   std::optional<std::vector<double>> weights = std::nullopt);

    /// Consecutive groups of `size` columns (the last may be shorter).
    static GroupPartition contiguous(const Dictionary& d, std::size_t size);

    std::size_t size() const noexcept { return groups_.size(); }
    std::size_t universe() const noexcept { return group_of_.size(); }
    const IndexSet& group(std::size_t g) const { return groups_[g]; }
    const std::vector<IndexSet>& groups() const noexcept { return groups_; }
    double weight(std::size_t g) const { return weights_[g]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double spectral_norm(std::size_t g) const { return norms_[g]; }
    const std::vector<double>& spectral_norms() const noexcept { return norms_; }
    std::size_t group_of(std::size_t i) const { return group_of_[i]; }

  private:
    std::vector<IndexSet> groups_;
    std::vector<double> weights_;
    std::vector<double> norms_;
    std::vector<std::size_t> group_of_;
};

}  // namespace screenlab
