#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointnp/encoder.hpp"
#include "pointnp/pose.hpp"
#include "pointnp/types.hpp"

// Serial reference implementations of the hot kernels. These are plain,
// single-threaded loops with scalar libm calls: the tests pin the parallel /
// vectorised paths against them, and the benchmark target reports the spread.

namespace pointnp::ref {

/// Same greedy selection and tie-breaks as pointnp::farthest_point_sample;
/// indices must match bit for bit.
std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t m);

/// Full sort per query; indices must match pointnp::knn exactly.
NeighborIndex knn(const PointCloud& queries, const PointCloud& reference, std::size_t k);

/// Scalar std::sin/std::cos evaluation of the positional encoding.
Matrix pos_e_batch(std::span<const Vec3> points, const PosEParams& params);

/// Straight-line serial encoder built from the reference kernels and the
/// composed per-neighborhood operations.
GlobalFeature encode_global(const PointCloud& cloud, const EncoderConfig& cfg);

}  // namespace pointnp::ref
