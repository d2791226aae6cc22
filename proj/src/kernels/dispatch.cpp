#include "llata/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace llata::kernels {

namespace scalar_impl {
float dot_f32(const float*, const float*, std::size_t);
double dot_f64(const double*, const double*, std::size_t);
float sqdist_f32(const float*, const float*, std::size_t);
double sqdist_f64(const double*, const double*, std::size_t);
float cosine_f32(const float*, const float*, std::size_t);
double cosine_f64(const double*, const double*, std::size_t);
}  // namespace scalar_impl

#if LLATA_HAVE_AVX2
namespace avx2_impl {
float dot_f32(const float*, const float*, std::size_t);
double dot_f64(const double*, const double*, std::size_t);
float sqdist_f32(const float*, const float*, std::size_t);
double sqdist_f64(const double*, const double*, std::size_t);
float cosine_f32(const float*, const float*, std::size_t);
double cosine_f64(const double*, const double*, std::size_t);
}  // namespace avx2_impl
#endif

namespace {

constexpr detail::Ops kScalarOps = {
    scalar_impl::dot_f32,    scalar_impl::dot_f64,
    scalar_impl::sqdist_f32, scalar_impl::sqdist_f64,
    scalar_impl::cosine_f32, scalar_impl::cosine_f64,
};

#if LLATA_HAVE_AVX2
constexpr detail::Ops kAvx2Ops = {
    avx2_impl::dot_f32,    avx2_impl::dot_f64,
    avx2_impl::sqdist_f32, avx2_impl::sqdist_f64,
    avx2_impl::cosine_f32, avx2_impl::cosine_f64,
};
#endif

bool cpu_has_avx2() {
#if LLATA_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level pick_level() {
  if (const char* env = std::getenv("LLATA_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Level::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Level::avx2;
  }
  return cpu_has_avx2() ? Level::avx2 : Level::scalar;
}

const detail::Ops& active_ops() {
  static const detail::Ops& ops = detail::ops_for(pick_level());
  return ops;
}

}  // namespace

namespace detail {

const Ops& ops_for(Level level) {
#if LLATA_HAVE_AVX2
  if (level == Level::avx2) return kAvx2Ops;
#endif
  (void)level;
  return kScalarOps;
}

}  // namespace detail

Level active_level() {
  static const Level level = pick_level();
  return level;
}

const char* level_name(Level level) {
  return level == Level::avx2 ? "avx2" : "scalar";
}

bool level_supported(Level level) {
  return level == Level::scalar || cpu_has_avx2();
}

float dot(std::span<const float> a, std::span<const float> b) {
  return active_ops().dot_f32(a.data(), b.data(), std::min(a.size(), b.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_ops().dot_f64(a.data(), b.data(), std::min(a.size(), b.size()));
}

float squared_distance(std::span<const float> a, std::span<const float> b) {
  return active_ops().sqdist_f32(a.data(), b.data(), std::min(a.size(), b.size()));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active_ops().sqdist_f64(a.data(), b.data(), std::min(a.size(), b.size()));
}

float cosine(std::span<const float> a, std::span<const float> b) {
  return active_ops().cosine_f32(a.data(), b.data(), std::min(a.size(), b.size()));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return active_ops().cosine_f64(a.data(), b.data(), std::min(a.size(), b.size()));
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) return;
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double total = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : v) x /= total;
}

}  // namespace llata::kernels
