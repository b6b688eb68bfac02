#pragma once

// Scalar type selection for the numerical core. The default build uses 32-bit
// floats; defining PT_REAL_DOUBLE switches to 64-bit. Each precision lives in
// its own inline namespace so both variants can be linked into one binary
// (the 64-bit gradient checks rely on this).

#ifdef PT_REAL_DOUBLE
#define PT_REAL_NS r64
#else
#define PT_REAL_NS r32
#endif

#include <random>

namespace pt {

using Rng = std::mt19937_64;

inline namespace PT_REAL_NS {

#ifdef PT_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

}  // namespace PT_REAL_NS
}  // namespace pt
