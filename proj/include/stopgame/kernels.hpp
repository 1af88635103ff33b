#pragma once

#include <cstddef>
#include <vector>

// Dense vector kernels used by the solver inner loops. Every kernel has a
// scalar reference implementation and may have SIMD variants; the dispatch
// table picks one at startup based on the host CPU. Set STOPGAME_SIMD to
// "scalar" or "avx2" to force a backend (the equivalence tests do this).
namespace stopgame::kernels {

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
// max_i |f[i]| / w[i]; caller guarantees w[i] > 0.
double sup_abs_ratio(const double* f, const double* w, std::size_t n);
// max_i |x[i] - y[i]| / w[i]
double sup_abs_ratio_diff(const double* x, const double* y, const double* w,
                          std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
// x[i] <- min(max(x[i], lo[i]), hi[i])
void clamp(double* x, const double* lo, const double* hi, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
double sup_abs_ratio(const double* f, const double* w, std::size_t n);
double sup_abs_ratio_diff(const double* x, const double* y, const double* w,
                          std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
void clamp(double* x, const double* lo, const double* hi, std::size_t n);
}  // namespace avx2
#endif

struct Backend {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sup_abs_ratio)(const double*, const double*, std::size_t);
  double (*sup_abs_ratio_diff)(const double*, const double*, const double*,
                               std::size_t);
  double (*max_abs_diff)(const double*, const double*, std::size_t);
  void (*clamp)(double*, const double*, const double*, std::size_t);
};

// Selected once per process.
const Backend& active();

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double sup_abs_ratio(const std::vector<double>& f,
                            const std::vector<double>& w) {
  return active().sup_abs_ratio(f.data(), w.data(), f.size());
}

inline double sup_abs_ratio_diff(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 const std::vector<double>& w) {
  return active().sup_abs_ratio_diff(x.data(), y.data(), w.data(), x.size());
}

inline double max_abs_diff(const std::vector<double>& x,
                           const std::vector<double>& y) {
  return active().max_abs_diff(x.data(), y.data(), x.size());
}

inline void clamp(std::vector<double>& x, const std::vector<double>& lo,
                  const std::vector<double>& hi) {
  active().clamp(x.data(), lo.data(), hi.data(), x.size());
}

}  // namespace stopgame::kernels
