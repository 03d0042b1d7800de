#include "pointnp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pointnp/geometry.hpp"

namespace pointnp::ref {

namespace {

// same total order as the parallel path
bool better(double d_new, const Vec3& p_new, std::uint32_t i_new, double d_best,
            const Vec3& p_best, std::uint32_t i_best) {
  if (d_new != d_best) return d_new > d_best;
  if (p_new != p_best) return p_new < p_best;
  return i_new < i_best;
}

}  // namespace

std::vector<std::uint32_t> farthest_point_sample(const PointCloud& cloud, std::size_t m) {
  cloud.validate();
  const std::size_t n = cloud.size();
  if (m < 1 || m > n) throw std::invalid_argument("ref::farthest_point_sample: m out of range");
  const std::vector<Vec3>& pts = cloud.points;

  const Vec3 centroid = pointnp::detail::sorted_centroid(pts);
  std::vector<std::uint32_t> selected;
  std::uint32_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = squared_distance(pts[i], centroid);
    if (better(d, pts[i], static_cast<std::uint32_t>(i), best_d, pts[best], best))
      best = static_cast<std::uint32_t>(i), best_d = d;
  }
  selected.push_back(best);

  while (selected.size() < m) {
    std::uint32_t next = 0;
    double next_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double min_d = std::numeric_limits<double>::infinity();
      for (std::uint32_t s : selected) min_d = std::min(min_d, squared_distance(pts[i], pts[s]));
      if (better(min_d, pts[i], static_cast<std::uint32_t>(i), next_d, pts[next], next))
        next = static_cast<std::uint32_t>(i), next_d = min_d;
    }
    selected.push_back(next);
  }
  return selected;
}

NeighborIndex knn(const PointCloud& queries, const PointCloud& reference, std::size_t k) {
  queries.validate();
  reference.validate();
  if (k < 1 || k > reference.size()) throw std::invalid_argument("ref::knn: k out of range");

  NeighborIndex out(queries.size(), k);
  std::vector<std::pair<double, std::uint32_t>> cand(reference.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t i = 0; i < reference.size(); ++i)
      cand[i] = {squared_distance(queries.points[q], reference.points[i]),
                 static_cast<std::uint32_t>(i)};
    std::sort(cand.begin(), cand.end());
    auto row = out.row(q);
    for (std::size_t j = 0; j < k; ++j) row[j] = cand[j].second;
  }
  return out;
}

Matrix pos_e_batch(std::span<const Vec3> points, const PosEParams& params) {
  const std::vector<double> freqs = pose_frequencies(params);
  const std::size_t pairs = params.dim / 6;
  const std::size_t block = params.dim / 3;
  Matrix out(points.size(), params.dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto row = out.row(i);
    for (int axis = 0; axis < 3; ++axis) {
      const double v = points[i][axis];
      for (std::size_t mfreq = 0; mfreq < pairs; ++mfreq) {
        const double arg = v * freqs[mfreq];
        row[axis * block + 2 * mfreq] = std::sin(arg);
        row[axis * block + 2 * mfreq + 1] = std::cos(arg);
      }
    }
  }
  return out;
}

GlobalFeature encode_global(const PointCloud& cloud, const EncoderConfig& cfg) {
  cloud.validate();
  cfg.validate();

  StagePointSet current;
  current.coords = cloud.points;
  current.feats = ref::pos_e_batch(cloud.points, PosEParams{cfg.init_dim, cfg.alpha, cfg.beta});

  for (std::size_t s = 1; s <= cfg.stages; ++s) {
    const std::size_t m_in = current.size();
    const std::size_t m_out = (m_in + 1) / 2;
    const std::size_t k = std::min(cfg.neighbors, m_in);

    PointCloud in_cloud{current.coords};
    const std::vector<std::uint32_t> centers = ref::farthest_point_sample(in_cloud, m_out);
    PointCloud center_cloud;
    for (std::uint32_t c : centers) center_cloud.points.push_back(current.coords[c]);
    const NeighborIndex nbrs = cfg.grouping == Grouping::kNN
                                   ? ref::knn(center_cloud, in_cloud, k)
                                   : ball_query(center_cloud, in_cloud, cfg.ball_radius, k);

    const PosEParams pose = cfg.stage_pose(s);
    StagePointSet next;
    next.coords = center_cloud.points;
    next.feats = Matrix(m_out, pose.dim);

    for (std::size_t ci = 0; ci < m_out; ++ci) {
      const auto row = nbrs.row(ci);
      std::vector<Vec3> nbr_coords(k);
      Matrix nbr_feats(k, current.feats.cols);
      for (std::size_t j = 0; j < k; ++j) {
        nbr_coords[j] = current.coords[row[j]];
        auto src = current.feats.row(row[j]);
        std::copy(src.begin(), src.end(), nbr_feats.row(j).begin());
      }
      const std::vector<Vec3> delta =
          normalize_neighborhood(current.coords[centers[ci]], nbr_coords);
      const Matrix expanded = cfg.feature_expansion
                                  ? expand_features(current.feats.row(centers[ci]), nbr_feats)
                                  : nbr_feats;
      const Matrix enc = ref::pos_e_batch(delta, {pose.dim, pose.alpha, pose.beta});  // scalar path
      Matrix weighted(k, pose.dim);
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < pose.dim; ++c)
          weighted.at(j, c) = (expanded.at(j, c) + enc.at(j, c)) * enc.at(j, c);
      const std::vector<double> pooled = pool_neighborhood(weighted, cfg.stage_pooling);
      std::copy(pooled.begin(), pooled.end(), next.feats.row(ci).begin());
    }
    current = std::move(next);
  }

  const Matrix& feats = current.feats;
  const std::size_t d = feats.cols;
  std::vector<double> maxv(d, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(d, 0.0);
  for (std::size_t i = 0; i < feats.rows; ++i) {
    auto row = feats.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      maxv[c] = std::max(maxv[c], row[c]);
      sum[c] += row[c];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(feats.rows);
  GlobalFeature g;
  if (cfg.global_pooling == GlobalPooling::MaxPlusAvg) {
    g.values.resize(d);
    for (std::size_t c = 0; c < d; ++c) g.values[c] = maxv[c] + sum[c] * inv_n;
  } else {
    g.values.resize(2 * d);
    for (std::size_t c = 0; c < d; ++c) {
      g.values[c] = maxv[c];
      g.values[d + c] = sum[c] * inv_n;
    }
  }
  return g;
}

}  // namespace pointnp::ref
