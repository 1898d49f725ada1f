#include "screenlab/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "screenlab/kernels.hpp"

namespace screenlab {

// ---------------------------------------------------------------------------
// IndexSet

IndexSet::IndexSet(std::initializer_list<std::size_t> idx)
    : IndexSet(std::vector<std::size_t>(idx)) {}

IndexSet::IndexSet(std::vector<std::size_t> idx) : idx_(std::move(idx)) {
    for (std::size_t k = 1; k < idx_.size(); ++k) {
        if (idx_[k] <= idx_[k - 1])
            throw std::invalid_argument("IndexSet: indices must be strictly increasing");
    }
}

IndexSet IndexSet::range(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    IndexSet s;
    s.idx_ = std::move(idx);
    return s;
}

bool IndexSet::contains(std::size_t i) const {
    return std::binary_search(idx_.begin(), idx_.end(), i);
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
    return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
}

IndexSet IndexSet::complement(std::size_t universe) const {
    std::vector<std::size_t> out;
    out.reserve(universe > size() ? universe - size() : 0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < universe; ++i) {
        if (k < idx_.size() && idx_[k] == i) {
            ++k;
            continue;
        }
        out.push_back(i);
    }
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
}

IndexSet IndexSet::set_union(const IndexSet& other) const {
    std::vector<std::size_t> out;
    out.reserve(size() + other.size());
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(out));
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
}

std::vector<std::size_t> IndexSet::positions_of(const IndexSet& sub) const {
    std::vector<std::size_t> pos;
    pos.reserve(sub.size());
    std::size_t k = 0;
    for (std::size_t i : sub) {
        while (k < idx_.size() && idx_[k] < i) ++k;
        if (k == idx_.size() || idx_[k] != i)
            throw std::invalid_argument("IndexSet::positions_of: not a subset");
        pos.push_back(k);
    }
    return pos;
}

// ---------------------------------------------------------------------------
// Dictionary

Dictionary::Dictionary(std::size_t rows, std::size_t cols, std::vector<double> col_major,
                       bool check_unit_norm)
    : rows_(rows), cols_(cols), data_(std::move(col_major)), original_(IndexSet::range(cols)),
      col_norm_checked_(check_unit_norm) {
    if (rows_ == 0 || cols_ == 0) throw DimensionError("Dictionary: N and K must be >= 1");
    if (data_.size() != rows_ * cols_)
        throw DimensionError("Dictionary: data size does not match rows*cols");
    for (double v : data_) {
        if (!std::isfinite(v)) throw std::invalid_argument("Dictionary: non-finite entry");
    }
    if (check_unit_norm) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double norm = std::sqrt(kernels::sqnorm(column(j)));
            if (std::abs(norm - 1.0) > kUnitNormTolerance) {
                throw std::invalid_argument("Dictionary: column " + std::to_string(j) +
                                            " is not unit-norm (norm " +
                                            std::to_string(norm) + ")");
            }
        }
    }
}

Dictionary Dictionary::from_row_major(std::size_t rows, std::size_t cols,
                                      std::span<const double> row_major,
                                      bool check_unit_norm) {
    if (row_major.size() != rows * cols)
        throw DimensionError("Dictionary: data size does not match rows*cols");
    std::vector<double> cm(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) cm[j * rows + i] = row_major[i * cols + j];
    return Dictionary(rows, cols, std::move(cm), check_unit_norm);
}

Vector Dictionary::apply(std::span<const double> x) const {
    Vector out(rows_);
    apply_into(x, out);
    return out;
}

void Dictionary::apply_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != cols_) throw DimensionError("Dictionary::apply: x has wrong length");
    if (out.size() != rows_) throw DimensionError("Dictionary::apply: out has wrong length");
    std::vector<std::size_t> idx(cols_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    kernels::active().gemv_cols(data_.data(), rows_, idx.data(), x.data(), cols_, out.data());
}

void Dictionary::apply_sparse_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != cols_) throw DimensionError("Dictionary::apply: x has wrong length");
    if (out.size() != rows_) throw DimensionError("Dictionary::apply: out has wrong length");
    std::vector<std::size_t> idx;
    std::vector<double> coef;
    for (std::size_t j = 0; j < cols_; ++j) {
        if (x[j] != 0.0) {
            idx.push_back(j);
            coef.push_back(x[j]);
        }
    }
    kernels::active().gemv_cols(data_.data(), rows_, idx.data(), coef.data(), idx.size(),
                                out.data());
}

Vector Dictionary::correlate(std::span<const double> v) const {
    Vector out(cols_);
    correlate_into(v, out);
    return out;
}

void Dictionary::correlate_into(std::span<const double> v, std::span<double> out) const {
    if (v.size() != rows_) throw DimensionError("Dictionary::correlate: v has wrong length");
    if (out.size() != cols_)
        throw DimensionError("Dictionary::correlate: out has wrong length");
    kernels::active().gemv_t(data_.data(), rows_, cols_, v.data(), out.data());
}

void Dictionary::retain_columns(std::span<const std::size_t> positions) {
    std::vector<std::size_t> orig;
    orig.reserve(positions.size());
    std::size_t dst = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const std::size_t src = positions[k];
        if (src >= cols_ || (k > 0 && src <= positions[k - 1]))
            throw std::invalid_argument("Dictionary::retain_columns: bad positions");
        if (src != dst) {
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(src * rows_), rows_,
                        data_.begin() + static_cast<std::ptrdiff_t>(dst * rows_));
        }
        orig.push_back(original_[src]);
        ++dst;
    }
    cols_ = positions.size();
    data_.resize(cols_ * rows_);
    original_ = IndexSet(std::move(orig));
}

Dictionary Dictionary::select_columns(std::span<const std::size_t> positions) const {
    Dictionary out = *this;
    out.retain_columns(positions);
    return out;
}

Dictionary reduce(const Dictionary& d_prev, const IndexSet& kept_prev,
                  const IndexSet& kept_next) {
    if (d_prev.cols() != kept_prev.size())
        throw DimensionError("reduce: dictionary width differs from kept_prev");
    if (!kept_next.is_subset_of(kept_prev))
        throw std::invalid_argument("reduce: kept_next is not a subset of kept_prev");
    const auto pos = kept_prev.positions_of(kept_next);
    return d_prev.select_columns(pos);
}

// ---------------------------------------------------------------------------
// Spectral norms

namespace {

// Rayleigh-quotient power iteration on A^T A for the column block `cols`.
double power_iteration(const Dictionary& d, const std::vector<std::size_t>& cols,
                       Vector start, const PowerIterationOptions& opt) {
    const std::size_t n = d.rows();
    const std::size_t m = cols.size();
    double nrm = std::sqrt(kernels::sqnorm(start));
    for (double& v : start) v /= nrm;

    Vector av(n), w(m);
    const auto& k = kernels::active();
    double rq = 0.0;
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
        k.gemv_cols(d.data().data(), n, cols.data(), start.data(), m, av.data());
        for (std::size_t j = 0; j < m; ++j) w[j] = k.dot(d.column(cols[j]).data(), av.data(), n);
        const double next = kernels::dot(start, w);  // v^T A^T A v with |v| = 1
        nrm = std::sqrt(kernels::sqnorm(w));
        if (nrm == 0.0) return 0.0;
        for (std::size_t j = 0; j < m; ++j) start[j] = w[j] / nrm;
        if (it > 0 && std::abs(next - rq) <= opt.tolerance * std::max(next, 1e-300)) {
            rq = next;
            break;
        }
        rq = next;
    }
    return std::sqrt(std::max(rq, 0.0));
}

}  // namespace

double spectral_norm(const Dictionary& d, const IndexSet& cols, PowerIterationOptions opt) {
    if (cols.empty()) throw std::invalid_argument("spectral_norm: empty column set");
    if (cols.indices().back() >= d.cols())
        throw DimensionError("spectral_norm: column index out of range");
    const std::size_t m = cols.size();
    if (m == 1) return std::sqrt(kernels::sqnorm(d.column(cols[0])));

    // All-ones start, plus one alternating start in case the first is
    // orthogonal to the leading singular vector.
    Vector ones(m, 1.0);
    Vector alt(m);
    for (std::size_t j = 0; j < m; ++j)
        alt[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(j) / static_cast<double>(m));
    const double a = power_iteration(d, cols.indices(), std::move(ones), opt);
    const double b = power_iteration(d, cols.indices(), std::move(alt), opt);
    return std::max(a, b);
}

double spectral_norm(const Dictionary& d, PowerIterationOptions opt) {
    return spectral_norm(d, IndexSet::range(d.cols()), opt);
}

// ---------------------------------------------------------------------------
// GroupPartition

GroupPartition::GroupPartition(const Dictionary& d, std::vector<IndexSet> groups,
                               std::optional<std::vector<double>> weights)
    : groups_(std::move(groups)) {
    const std::size_t k = d.cols();
    constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
    group_of_.assign(k, kUnassigned);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].empty()) throw std::invalid_argument("GroupPartition: empty group");
        for (std::size_t i : groups_[g]) {
            if (i >= k) throw DimensionError("GroupPartition: index out of range");
            if (group_of_[i] != kUnassigned)
                throw std::invalid_argument("GroupPartition: groups overlap at index " +
                                            std::to_string(i));
            group_of_[i] = g;
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (group_of_[i] == kUnassigned)
            throw std::invalid_argument("GroupPartition: index " + std::to_string(i) +
                                        " belongs to no group");
    }

    if (weights) {
        if (weights->size() != groups_.size())
            throw DimensionError("GroupPartition: one weight per group expected");
        weights_ = std::move(*weights);
    } else {
        weights_.reserve(groups_.size());
        for (const auto& g : groups_) weights_.push_back(std::sqrt(static_cast<double>(g.size())));
    }
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("GroupPartition: weights must be positive");
    }

    norms_.reserve(groups_.size());
    for (const auto& g : groups_) norms_.push_back(screenlab::spectral_norm(d, g));
}

GroupPartition GroupPartition::contiguous(const Dictionary& d, std::size_t size) {
    if (size == 0) throw std::invalid_argument("GroupPartition: group size must be >= 1");
    std::vector<IndexSet> groups;
    for (std::size_t start = 0; start < d.cols(); start += size) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(d.cols(), start + size); ++i) idx.push_back(i);
        groups.emplace_back(std::move(idx));
    }
    return GroupPartition(d, std::move(groups));
}

}  // namespace screenlab
