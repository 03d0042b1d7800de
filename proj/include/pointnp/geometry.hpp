#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pointnp/types.hpp"

namespace pointnp {

/// Greedy farthest point sampling. The first index is the point farthest from
/// the cloud centroid; each following index maximizes the minimum distance to
/// the points already selected. Ties resolve by lexicographic (x,y,z), then
/// smallest index, so the selected coordinate set depends only on geometry.
/// Throws std::invalid_argument unless 1 <= m <= N.
std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t m);

/// k nearest reference points per query, rows sorted by ascending distance
/// with ties by smaller reference index. Throws if k < 1 or k > N_reference.
NeighborIndex knn(const PointCloud& queries, const PointCloud& reference, std::size_t k);

/// Radius grouping: per query, the reference points within `radius` in
/// (distance, index) order, truncated to k rows; when fewer than k fall inside
/// the ball the row is padded by repeating the nearest point found (the query
/// itself counts when it belongs to the reference set). Throws if no reference
/// point lies within the radius of some query, or on invalid k/radius.
NeighborIndex ball_query(const PointCloud& queries, const PointCloud& reference, double radius,
                         std::size_t k);

/// Translates the centroid to the origin and scales so the maximum point norm
/// is 1 (all-identical clouds keep scale 1). The centroid is accumulated over
/// per-axis sorted values, which makes the result exactly permutation
/// invariant.
PointCloud normalize_cloud(const PointCloud& cloud);

/// Offsets p_j - center, centered by their per-axis mean and divided by the
/// scalar standard deviation of all 3k centered entries plus eps = 1e-5.
std::vector<Vec3> normalize_neighborhood(const Vec3& center, std::span<const Vec3> neighbors);

namespace detail {

/// Permutation-invariant centroid (per-axis sorted summation).
Vec3 sorted_centroid(std::span<const Vec3> points);

}  // namespace detail

}  // namespace pointnp
