// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace screenlab::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sqnorm(const double* x, std::size_t n) { return dot(x, x, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v,
            double* out) {
    std::size_t j = 0;
    // Four columns share each load of v.
    for (; j + 4 <= cols; j += 4) {
        const double* c0 = a + j * rows;
        const double* c1 = c0 + rows;
        const double* c2 = c1 + rows;
        const double* c3 = c2 + rows;
        __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
        __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= rows; i += 4) {
            const __m256d vv = _mm256_loadu_pd(v + i);
            s0 = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + i), vv, s0);
            s1 = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + i), vv, s1);
            s2 = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + i), vv, s2);
            s3 = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + i), vv, s3);
        }
        double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
        for (; i < rows; ++i) {
            r0 += c0[i] * v[i];
            r1 += c1[i] * v[i];
            r2 += c2[i] * v[i];
            r3 += c3[i] * v[i];
        }
        out[j] = r0;
        out[j + 1] = r1;
        out[j + 2] = r2;
        out[j + 3] = r3;
    }
    for (; j < cols; ++j) out[j] = dot(a + j * rows, v, rows);
}

void gemv_cols(const double* a, std::size_t rows, const std::size_t* cols,
               const double* coef, std::size_t count, double* out) {
    std::size_t i0 = 0;
    // Row-blocked so each output strip stays in registers across columns.
    constexpr std::size_t kStrip = 16;
    for (; i0 + kStrip <= rows; i0 += kStrip) {
        __m256d o0 = _mm256_setzero_pd(), o1 = _mm256_setzero_pd();
        __m256d o2 = _mm256_setzero_pd(), o3 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < count; ++k) {
            const double* c = a + cols[k] * rows + i0;
            const __m256d w = _mm256_set1_pd(coef[k]);
            o0 = _mm256_fmadd_pd(w, _mm256_loadu_pd(c), o0);
            o1 = _mm256_fmadd_pd(w, _mm256_loadu_pd(c + 4), o1);
            o2 = _mm256_fmadd_pd(w, _mm256_loadu_pd(c + 8), o2);
            o3 = _mm256_fmadd_pd(w, _mm256_loadu_pd(c + 12), o3);
        }
        _mm256_storeu_pd(out + i0, o0);
        _mm256_storeu_pd(out + i0 + 4, o1);
        _mm256_storeu_pd(out + i0 + 8, o2);
        _mm256_storeu_pd(out + i0 + 12, o3);
    }
    for (std::size_t i = i0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < count; ++k) s += coef[k] * a[cols[k] * rows + i];
        out[i] = s;
    }
}

void soft_threshold(const double* x, double t, double* out, std::size_t n) {
    const __m256d hi = _mm256_set1_pd(t);
    const __m256d lo = _mm256_set1_pd(-t);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        // max/min order matches the scalar ternary for every finite input.
        const __m256d c = _mm256_max_pd(_mm256_min_pd(v, hi), lo);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(v, c));
    }
    for (; i < n; ++i) {
        const double c = x[i] < -t ? -t : (x[i] > t ? t : x[i]);
        out[i] = x[i] - c;
    }
}

}  // namespace screenlab::kernels::avx2
