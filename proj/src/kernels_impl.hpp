#pragma once

#include <cstddef>

namespace screenlab::kernels::scalar {
double dot(const double* a, const double* b, std::size_t n);
double sqnorm(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v,
            double* out);
void gemv_cols(const double* a, std::size_t rows, const std::size_t* cols,
               const double* coef, std::size_t count, double* out);
void soft_threshold(const double* x, double t, double* out, std::size_t n);
}  // namespace screenlab::kernels::scalar

namespace screenlab::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sqnorm(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* v,
            double* out);
void gemv_cols(const double* a, std::size_t rows, const std::size_t* cols,
               const double* coef, std::size_t count, double* out);
void soft_threshold(const double* x, double t, double* out, std::size_t n);
}  // namespace screenlab::kernels::avx2
