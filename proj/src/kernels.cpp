#include "specsim/kernels.hpp"

namespace specsim::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  double (*gather_dot)(const double*, const double*, std::uint32_t, std::size_t);
  double (*ratio_weighted_sum)(const double*, const double*, double, std::size_t);
  double (*inv_weighted_sum)(const double*, const double*, double, std::size_t);
};

constexpr Table kScalar = {
    detail::dot_scalar,
    detail::axpy_scalar,
    detail::gather_dot_scalar,
    detail::ratio_weighted_sum_scalar,
    detail::inv_weighted_sum_scalar,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2 = {
    detail::dot_avx2,
    detail::axpy_avx2,
    detail::gather_dot_avx2,
    detail::ratio_weighted_sum_avx2,
    detail::inv_weighted_sum_avx2,
};

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#else
bool cpu_has_avx2() { return false; }
#endif

Isa g_isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;

const Table& table() {
#if defined(__x86_64__) || defined(_M_X64)
  if (g_isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
  g_isa = (isa == Isa::avx2 && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar;
}

double dot(const double* a, const double* b, std::size_t len) {
  return table().dot(a, b, len);
}

void axpy(double* y, double c, const double* x, std::size_t len) {
  table().axpy(y, c, x, len);
}

double gather_dot(const double* t, const double* x, std::uint32_t mask,
                  std::size_t len) {
  return table().gather_dot(t, x, mask, len);
}

double ratio_weighted_sum(const double* w, const double* r, double shift,
                          std::size_t len) {
  return table().ratio_weighted_sum(w, r, shift, len);
}

double inv_weighted_sum(const double* w, const double* r, double shift,
                        std::size_t len) {
  return table().inv_weighted_sum(w, r, shift, len);
}

}  // namespace specsim::kernels
