#pragma once

#include <cstddef>
#include <cstdint>

// Array kernels for pattern-indexed tables. Everything downstream of the
// efficiency table reduces arrays of length 2^n, and the optimizers evaluate
// these sums thousands of times per solve, so the hot ones ship with AVX2
// variants picked once at startup. The scalar versions are the reference;
// the vector paths must agree with them to roundoff (equivalence tests
// enforce this).

namespace specsim::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();

// Overrides dispatch. Asking for an ISA the CPU lacks silently falls back
// to scalar. Meant for tests and benchmarks, not production tuning.
void force_isa(Isa isa);

// sum_k a[k] * b[k]
double dot(const double* a, const double* b, std::size_t len);

// y[k] += c * x[k]
void axpy(double* y, double c, const double* x, std::size_t len);

// sum_k table[k & mask] * x[k]
double gather_dot(const double* table, const double* x, std::uint32_t mask,
                  std::size_t len);

// sum_k w[k] * r[k] / (r[k] - shift)
double ratio_weighted_sum(const double* w, const double* r, double shift,
                          std::size_t len);

// sum_k w[k] / (r[k] - shift)
double inv_weighted_sum(const double* w, const double* r, double shift,
                        std::size_t len);

namespace detail {

double dot_scalar(const double*, const double*, std::size_t);
void axpy_scalar(double*, double, const double*, std::size_t);
double gather_dot_scalar(const double*, const double*, std::uint32_t, std::size_t);
double ratio_weighted_sum_scalar(const double*, const double*, double, std::size_t);
double inv_weighted_sum_scalar(const double*, const double*, double, std::size_t);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double*, const double*, std::size_t);
void axpy_avx2(double*, double, const double*, std::size_t);
double gather_dot_avx2(const double*, const double*, std::uint32_t, std::size_t);
double ratio_weighted_sum_avx2(const double*, const double*, double, std::size_t);
double inv_weighted_sum_avx2(const double*, const double*, double, std::size_t);
#endif

}  // namespace detail

}  // namespace specsim::kernels
