#pragma once

// Dense double-precision inner loops used by the solvers.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2+FMA variant is compiled into a separate translation unit and selected
// at startup when the CPU reports both features. SCREENLAB_KERNELS=scalar in
// the environment forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace screenlab::kernels {

struct KernelTable {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sqnorm)(const double* x, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[j] = <a[:, j], v> for a column-major block with `rows` rows.
    void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols,
                   const double* v, double* out);
    // out = sum_k coef[k] * a[:, cols[k]]  (out is overwritten)
    void (*gemv_cols)(const double* a, std::size_t rows, const std::size_t* cols,
                      const double* coef, std::size_t count, double* out);
    // out[i] = x[i] - clamp(x[i], -t, t)
    void (*soft_threshold)(const double* x, double t, double* out, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// Table used by the wrappers below.
const KernelTable& active();

/// Switch the active table ("scalar", "avx2", or "auto"). Returns false if the
/// requested variant is unavailable; the active table is left unchanged then.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sqnorm(std::span<const double> x) {
    return active().sqnorm(x.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void soft_threshold(std::span<const double> x, double t, std::span<double> out) {
    active().soft_threshold(x.data(), t, out.data(), x.size());
}

}  // namespace screenlab::kernels
