#pragma once

#include <cstddef>
#include <span>

// Vector math inner loops. Scalar reference implementations plus AVX2
// variants; the active variant is picked once at startup from CPUID and can
// be pinned with LLATA_KERNELS=scalar|avx2 in the environment.
namespace llata::kernels {

enum class Level { scalar, avx2 };

Level active_level();
const char* level_name(Level level);

/// True when `level` can run on this CPU/build.
bool level_supported(Level level);

float dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);

float squared_distance(std::span<const float> a, std::span<const float> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Cosine similarity; 0 when either vector has zero norm.
float cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

/// Numerically stable in-place softmax. Scalar on purpose: the vectors here
/// are class-sized, never feature-sized.
void softmax_inplace(std::span<double> v);

namespace detail {

struct Ops {
  float (*dot_f32)(const float*, const float*, std::size_t);
  double (*dot_f64)(const double*, const double*, std::size_t);
  float (*sqdist_f32)(const float*, const float*, std::size_t);
  double (*sqdist_f64)(const double*, const double*, std::size_t);
  float (*cosine_f32)(const float*, const float*, std::size_t);
  double (*cosine_f64)(const double*, const double*, std::size_t);
};

/// Table for a specific level, independent of the active dispatch.
/// Used by the scalar-vs-SIMD equivalence tests.
const Ops& ops_for(Level level);

}  // namespace detail

}  // namespace llata::kernels
