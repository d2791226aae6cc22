#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "llata/kernels.hpp"
#include "llata/rng.hpp"

using namespace llata;

namespace {

std::vector<float> random_f32(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform01() * 4.0 - 2.0);
  return v;
}

std::vector<double> random_f64(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform01() * 4.0 - 2.0;
  return v;
}

}  // namespace

TEST_CASE("scalar kernels: hand values") {
  const std::vector<float> a{1.0f, 2.0f, 3.0f};
  const std::vector<float> b{4.0f, -5.0f, 6.0f};
  const auto& ops = kernels::detail::ops_for(kernels::Level::scalar);
  CHECK(ops.dot_f32(a.data(), b.data(), 3) == doctest::Approx(12.0f));
  CHECK(ops.sqdist_f32(a.data(), b.data(), 3) == doctest::Approx(9.0f + 49.0f + 9.0f));

  const std::vector<double> u{1.0, 0.0};
  const std::vector<double> v{0.0, 1.0};
  CHECK(ops.cosine_f64(u.data(), v.data(), 2) == doctest::Approx(0.0));
  CHECK(ops.cosine_f64(u.data(), u.data(), 2) == doctest::Approx(1.0));
}

TEST_CASE("cosine of a zero vector is zero") {
  const std::vector<double> z{0.0, 0.0, 0.0};
  const std::vector<double> v{1.0, 2.0, 3.0};
  CHECK(kernels::cosine(std::span<const double>(z), std::span<const double>(v)) == 0.0);
  const std::vector<float> zf{0.0f};
  const std::vector<float> vf{2.0f};
  CHECK(kernels::cosine(std::span<const float>(zf), std::span<const float>(vf)) == 0.0f);
}

TEST_CASE("cosine is invariant under positive rescaling") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(64);
    auto a = random_f64(rng, n);
    auto b = random_f64(rng, n);
    const double before = kernels::cosine(std::span<const double>(a), std::span<const double>(b));
    const double scale_a = 0.1 + rng.uniform01() * 10.0;
    const double scale_b = 0.1 + rng.uniform01() * 10.0;
    for (double& x : a) x *= scale_a;
    for (double& x : b) x *= scale_b;
    const double after = kernels::cosine(std::span<const double>(a), std::span<const double>(b));
    CHECK(after == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("avx2 variants match the scalar reference") {
  if (!kernels::level_supported(kernels::Level::avx2)) {
    MESSAGE("AVX2 unavailable; dispatch stays scalar");
    return;
  }
  const auto& scalar = kernels::detail::ops_for(kernels::Level::scalar);
  const auto& avx2 = kernels::detail::ops_for(kernels::Level::avx2);

  Rng rng(7);
  // lengths straddling the 8/4-lane boundaries plus ragged tails
  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 100, 257}) {
    const auto af = random_f32(rng, n);
    const auto bf = random_f32(rng, n);
    CHECK(avx2.dot_f32(af.data(), bf.data(), n) ==
          doctest::Approx(scalar.dot_f32(af.data(), bf.data(), n)).epsilon(1e-4));
    CHECK(avx2.sqdist_f32(af.data(), bf.data(), n) ==
          doctest::Approx(scalar.sqdist_f32(af.data(), bf.data(), n)).epsilon(1e-4));
    if (n > 0) {
      CHECK(avx2.cosine_f32(af.data(), bf.data(), n) ==
            doctest::Approx(scalar.cosine_f32(af.data(), bf.data(), n)).epsilon(1e-4));
    }

    const auto ad = random_f64(rng, n);
    const auto bd = random_f64(rng, n);
    CHECK(avx2.dot_f64(ad.data(), bd.data(), n) ==
          doctest::Approx(scalar.dot_f64(ad.data(), bd.data(), n)).epsilon(1e-11));
    CHECK(avx2.sqdist_f64(ad.data(), bd.data(), n) ==
          doctest::Approx(scalar.sqdist_f64(ad.data(), bd.data(), n)).epsilon(1e-11));
    if (n > 0) {
      CHECK(avx2.cosine_f64(ad.data(), bd.data(), n) ==
            doctest::Approx(scalar.cosine_f64(ad.data(), bd.data(), n)).epsilon(1e-11));
    }
  }
}

TEST_CASE("softmax lands on the simplex") {
  std::vector<double> v{0.0, 7.0, 0.0, 0.0, 0.0, 9.0};
  kernels::softmax_inplace(v);
  double total = 0.0;
  for (double x : v) {
    CHECK(x >= 0.0);
    total += x;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[5] > v[1]);

  // large inputs must not overflow
  std::vector<double> big{1000.0, 1001.0, 999.0};
  kernels::softmax_inplace(big);
  for (double x : big) CHECK(std::isfinite(x));
  CHECK(big[1] > big[0]);
}

TEST_CASE("softmax of equal entries is uniform") {
  std::vector<double> v(5, 3.25);
  kernels::softmax_inplace(v);
  for (double x : v) CHECK(x == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("active level reports something sensible") {
  const auto level = kernels::active_level();
  CHECK((level == kernels::Level::scalar || level == kernels::Level::avx2));
  CHECK(kernels::level_name(level) != nullptr);
}
