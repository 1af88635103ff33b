#include "stopgame/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "stopgame/errors.hpp"

namespace stopgame::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sup_abs_ratio(const double* f, const double* w, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, std::fabs(f[i]) / w[i]);
  }
  return best;
}

double sup_abs_ratio_diff(const double* x, const double* y, const double* w,
                          std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, std::fabs(x[i] - y[i]) / w[i]);
  }
  return best;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, std::fabs(x[i] - y[i]));
  }
  return best;
}

void clamp(double* x, const double* lo, const double* hi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
  }
}

}  // namespace scalar

namespace {

constexpr Backend kScalarBackend = {
    "scalar",          scalar::dot,          scalar::sup_abs_ratio,
    scalar::sup_abs_ratio_diff, scalar::max_abs_diff, scalar::clamp,
};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Backend kAvx2Backend = {
    "avx2",          avx2::dot,          avx2::sup_abs_ratio,
    avx2::sup_abs_ratio_diff, avx2::max_abs_diff, avx2::clamp,
};

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const Backend& select_backend() {
  const char* forced = std::getenv("STOPGAME_SIMD");
#if defined(__x86_64__) || defined(_M_X64)
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return kScalarBackend;
    if (std::strcmp(forced, "avx2") == 0) {
      if (!avx2_supported()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "STOPGAME_SIMD=avx2 but the CPU lacks AVX2+FMA");
      }
      return kAvx2Backend;
    }
    throw Error(ErrorCode::kInvalidArgument,
                std::string("unknown STOPGAME_SIMD value: ") + forced);
  }
  if (avx2_supported()) return kAvx2Backend;
#else
  if (forced != nullptr && std::strcmp(forced, "scalar") != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "only the scalar backend is available on this architecture");
  }
#endif
  return kScalarBackend;
}

}  // namespace

const Backend& active() {
  static const Backend& chosen = select_backend();
  return chosen;
}

}  // namespace stopgame::kernels
