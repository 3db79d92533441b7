#include "specsim/kernels.hpp"

namespace specsim::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += a[k] * b[k];
  return acc;
}

void axpy_scalar(double* y, double c, const double* x, std::size_t len) {
  for (std::size_t k = 0; k < len; ++k) y[k] += c * x[k];
}

double gather_dot_scalar(const double* table, const double* x,
                         std::uint32_t mask, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += table[k & mask] * x[k];
  return acc;
}

double ratio_weighted_sum_scalar(const double* w, const double* r,
                                 double shift, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += w[k] * r[k] / (r[k] - shift);
  return acc;
}

double inv_weighted_sum_scalar(const double* w, const double* r, double shift,
                               std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = 0; k < len; ++k) acc += w[k] / (r[k] - shift);
  return acc;
}

}  // namespace specsim::kernels::detail
