#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stopgame/kernels.hpp"
#include "stopgame/rng.hpp"

using namespace stopgame;

namespace {

std::vector<double> random_vec(CounterRng& rng, std::size_t n, double lo,
                               double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + rng.next_double() * (hi - lo);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels on small known inputs") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {4.0, -5.0, 6.0};
  CHECK(kernels::scalar::dot(x.data(), y.data(), 3) == doctest::Approx(12.0));

  const std::vector<double> f = {2.0, 6.0};
  const std::vector<double> w = {1.0, 2.0};
  CHECK(kernels::scalar::sup_abs_ratio(f.data(), w.data(), 2) ==
        doctest::Approx(3.0));
  CHECK(kernels::scalar::max_abs_diff(x.data(), y.data(), 3) ==
        doctest::Approx(7.0));

  std::vector<double> v = {-1.0, 0.5, 9.0};
  const std::vector<double> lo = {0.0, 0.0, 0.0};
  const std::vector<double> hi = {5.0, 5.0, 5.0};
  kernels::scalar::clamp(v.data(), lo.data(), hi.data(), 3);
  CHECK(v == std::vector<double>{0.0, 0.5, 5.0});
}

TEST_CASE("dispatched backend matches the scalar reference") {
  const kernels::Backend& backend = kernels::active();
  CounterRng rng(20240817, 0);

  // Lengths straddle the vector width so the tails get exercised.
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 64u, 67u,
                        128u, 257u}) {
    const auto x = random_vec(rng, n, -50.0, 50.0);
    const auto y = random_vec(rng, n, -50.0, 50.0);
    const auto w = random_vec(rng, n, 0.5, 10.0);

    // dot may re-associate; bound the drift instead of demanding equality.
    const double tol = 1e-12 * (1.0 + static_cast<double>(n)) * 50.0;
    CHECK(std::fabs(backend.dot(x.data(), y.data(), n) -
                    kernels::scalar::dot(x.data(), y.data(), n)) <= tol);
    // max/clamp reductions reorder nothing; they must agree exactly.
    CHECK(backend.sup_abs_ratio(x.data(), w.data(), n) ==
          kernels::scalar::sup_abs_ratio(x.data(), w.data(), n));
    CHECK(backend.sup_abs_ratio_diff(x.data(), y.data(), w.data(), n) ==
          kernels::scalar::sup_abs_ratio_diff(x.data(), y.data(), w.data(), n));
    CHECK(backend.max_abs_diff(x.data(), y.data(), n) ==
          kernels::scalar::max_abs_diff(x.data(), y.data(), n));

    auto v1 = random_vec(rng, n, -20.0, 20.0);
    auto v2 = v1;
    auto lo = random_vec(rng, n, -10.0, 0.0);
    auto hi = random_vec(rng, n, 0.0, 10.0);
    backend.clamp(v1.data(), lo.data(), hi.data(), n);
    kernels::scalar::clamp(v2.data(), lo.data(), hi.data(), n);
    CHECK(v1 == v2);
  }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants match scalar when the host supports them") {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
    return;  // nothing to compare on this host
  }
  CounterRng rng(7, 0);
  for (std::size_t n : {5u, 12u, 33u, 100u}) {
    const auto x = random_vec(rng, n, -5.0, 5.0);
    const auto y = random_vec(rng, n, -5.0, 5.0);
    const auto w = random_vec(rng, n, 0.25, 4.0);
    CHECK(std::fabs(kernels::avx2::dot(x.data(), y.data(), n) -
                    kernels::scalar::dot(x.data(), y.data(), n)) <=
          1e-12 * static_cast<double>(n) * 25.0);
    CHECK(kernels::avx2::sup_abs_ratio(x.data(), w.data(), n) ==
          kernels::scalar::sup_abs_ratio(x.data(), w.data(), n));
    CHECK(kernels::avx2::sup_abs_ratio_diff(x.data(), y.data(), w.data(), n) ==
          kernels::scalar::sup_abs_ratio_diff(x.data(), y.data(), w.data(),
                                              n));
    CHECK(kernels::avx2::max_abs_diff(x.data(), y.data(), n) ==
          kernels::scalar::max_abs_diff(x.data(), y.data(), n));
  }
}
#endif
