#include "pointnp/geometry.hpp"

#include <algorithm>
#include <limits>

namespace pointnp {

namespace detail {

Vec3 sorted_centroid(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  std::vector<double> axis(n);
  Vec3 c{0.0, 0.0, 0.0};
  for (int a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < n; ++i) axis[i] = points[i][a];
    std::sort(axis.begin(), axis.end());
    double s = 0.0;
    for (double v : axis) s += v;
    c[a] = s / static_cast<double>(n);
  }
  return c;
}

// Candidate order for max-distance selection: larger distance wins, then
// lexicographically smaller coordinates, then smaller index.
inline bool better_candidate(double d_new, const Vec3& p_new, std::uint32_t i_new, double d_best,
                             const Vec3& p_best, std::uint32_t i_best) {
  if (d_new != d_best) return d_new > d_best;
  if (p_new != p_best) return p_new < p_best;
  return i_new < i_best;
}

}  // namespace detail

std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t m) {
  cloud.validate();
  const std::size_t n = cloud.size();
  if (m < 1 || m > n) throw std::invalid_argument("farthest_point_sample: m out of range");

  const std::vector<Vec3>& pts = cloud.points;
  std::vector<std::uint32_t> selected;
  selected.reserve(m);

  // Seed: farthest from the centroid.
  const Vec3 centroid = detail::sorted_centroid(pts);
  std::uint32_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_distance(pts[i], centroid);
    if (detail::better_candidate(d, pts[i], static_cast<std::uint32_t>(i), best_d, pts[best],
                                 best))
      best = static_cast<std::uint32_t>(i), best_d = d;
  }
  selected.push_back(best);

  // min squared distance from each point to the selected set
  std::vector<double> min_d(n);
  const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sn; ++i)
    min_d[i] = squared_distance(pts[i], pts[selected[0]]);

  while (selected.size() < m) {
    const Vec3& last = pts[selected.back()];
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i)
      min_d[i] = std::min(min_d[i], squared_distance(pts[i], last));

    std::uint32_t next = 0;
    double next_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::better_candidate(min_d[i], pts[i], static_cast<std::uint32_t>(i), next_d,
                                   pts[next], next))
        next = static_cast<std::uint32_t>(i), next_d = min_d[i];
    }
    selected.push_back(next);
  }
  return selected;
}

NeighborIndex knn(const PointCloud& queries, const PointCloud& reference, std::size_t k) {
  queries.validate();
  reference.validate();
  const std::size_t nq = queries.size();
  const std::size_t nr = reference.size();
  if (k < 1 || k > nr) throw std::invalid_argument("knn: k out of range");

  NeighborIndex out(nq, k);
  const std::int64_t snq = static_cast<std::int64_t>(nq);
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < snq; ++q) {
    std::vector<std::pair<double, std::uint32_t>> cand(nr);
    for (std::size_t i = 0; i < nr; ++i)
      cand[i] = {squared_distance(queries.points[q], reference.points[i]),
                 static_cast<std::uint32_t>(i)};
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    auto row = out.row(static_cast<std::size_t>(q));
    for (std::size_t j = 0; j < k; ++j) row[j] = cand[j].second;
  }
  return out;
}

NeighborIndex ball_query(const PointCloud& queries, const PointCloud& reference, double radius,
                         std::size_t k) {
  queries.validate();
  reference.validate();
  if (k < 1 || k > reference.size()) throw std::invalid_argument("ball_query: k out of range");
  if (!(radius > 0.0)) throw std::invalid_argument("ball_query: radius must be positive");

  const std::size_t nq = queries.size();
  const std::size_t nr = reference.size();
  const double r2 = radius * radius;
  NeighborIndex out(nq, k);
  bool empty_ball = false;
  const std::int64_t snq = static_cast<std::int64_t>(nq);
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < snq; ++q) {
    std::vector<std::pair<double, std::uint32_t>> inside;
    for (std::size_t i = 0; i < nr; ++i) {
      const double d = squared_distance(queries.points[q], reference.points[i]);
      if (d <= r2) inside.emplace_back(d, static_cast<std::uint32_t>(i));
    }
    if (inside.empty()) {
#pragma omp atomic write
      empty_ball = true;
      continue;
    }
    std::sort(inside.begin(), inside.end());
    auto row = out.row(static_cast<std::size_t>(q));
    for (std::size_t j = 0; j < k; ++j)
      row[j] = j < inside.size() ? inside[j].second : inside[0].second;
  }
  if (empty_ball) throw std::invalid_argument("ball_query: a query has no reference point in radius");
  return out;
}

PointCloud normalize_cloud(const PointCloud& cloud) {
  cloud.validate();
  const Vec3 centroid = detail::sorted_centroid(cloud.points);
  PointCloud out;
  out.points.reserve(cloud.size());
  double max_norm = 0.0;
  for (const Vec3& p : cloud.points) {
    const Vec3 c = p - centroid;
    out.points.push_back(c);
    max_norm = std::max(max_norm, norm(c));
  }
  if (max_norm > 0.0) {
    const double inv = 1.0 / max_norm;
    for (Vec3& p : out.points) p = p * inv;
  }
  return out;
}

std::vector<Vec3> normalize_neighborhood(const Vec3& center, std::span<const Vec3> neighbors) {
  const std::size_t k = neighbors.size();
  if (k < 1) throw std::invalid_argument("normalize_neighborhood: empty neighborhood");

  std::vector<Vec3> centered(k);
  Vec3 mean{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < k; ++j) {
    centered[j] = neighbors[j] - center;
    mean = mean + centered[j];
  }
  mean = mean * (1.0 / static_cast<double>(k));

  double sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    centered[j] = centered[j] - mean;
    sq += dot(centered[j], centered[j]);
  }
  // population std over all 3k centered entries
  const double sigma = std::sqrt(sq / static_cast<double>(3 * k));
  const double inv = 1.0 / (sigma + 1e-5);
  for (Vec3& v : centered) v = v * inv;
  return centered;
}

}  // namespace pointnp
