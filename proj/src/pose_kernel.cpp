// Hot inner loop of the positional encoding. This translation unit is compiled
// with -ffast-math so the sin/cos loops vectorise through libmvec; keeping it
// isolated leaves the rest of the library under strict IEEE flags. Accuracy
// stays within a few ulp of the scalar libm path (see tests/test_parallel.cpp
// for the cross-check against pointnp::ref::pos_e_batch).

#include <cmath>
#include <vector>

#include "pointnp/pose.hpp"

namespace pointnp::detail {

void pos_e_kernel(const Vec3* points, std::size_t n, std::size_t dim, const double* freqs,
                  double* out) {
  const std::size_t pairs = dim / 6;  // frequencies per axis
  const std::size_t block = dim / 3;  // channels per axis

  std::vector<double> arg(pairs), sv(pairs), cv(pairs);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = points[i];
    double* row = out + i * dim;
    for (int axis = 0; axis < 3; ++axis) {
      const double v = p[axis];
      double* dst = row + axis * block;
      for (std::size_t m = 0; m < pairs; ++m) arg[m] = v * freqs[m];
      for (std::size_t m = 0; m < pairs; ++m) sv[m] = std::sin(arg[m]);
      for (std::size_t m = 0; m < pairs; ++m) cv[m] = std::cos(arg[m]);
      for (std::size_t m = 0; m < pairs; ++m) {
        dst[2 * m] = sv[m];
        dst[2 * m + 1] = cv[m];
      }
    }
  }
}

}  // namespace pointnp::detail
