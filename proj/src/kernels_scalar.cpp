#include "kernels_impl.hpp"

namespace screenlab::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sqnorm(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v,
            double* out) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = dot(a + j * rows, v, rows);
}

void gemv_cols(const double* a, std::size_t rows, const std::size_t* cols,
               const double* coef, std::size_t count, double* out) {
    for (std::size_t i = 0; i < rows; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < count; ++k) axpy(coef[k], a + cols[k] * rows, out, rows);
}

void soft_threshold(const double* x, double t, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double c = x[i] < -t ? -t : (x[i] > t ? t : x[i]);
        out[i] = x[i] - c;
    }
}

}  // namespace screenlab::kernels::scalar
