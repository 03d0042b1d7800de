#include "pointnp/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pointnp {

void EncoderConfig::validate() const {
  if (stages < 1) throw std::invalid_argument("EncoderConfig: stages must be >= 1");
  if (init_dim == 0 || init_dim % 6 != 0)
    throw std::invalid_argument("EncoderConfig: init_dim must be a positive multiple of 6");
  if (neighbors < 1) throw std::invalid_argument("EncoderConfig: neighbors must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("EncoderConfig: alpha and beta must be positive");
  if (grouping == Grouping::BallQuery && !(ball_radius > 0.0))
    throw std::invalid_argument("EncoderConfig: ball_radius must be positive");
  if (!stage_alpha.empty() && stage_alpha.size() < stages)
    throw std::invalid_argument("EncoderConfig: stage_alpha shorter than stage count");
  if (!stage_beta.empty() && stage_beta.size() < stages)
    throw std::invalid_argument("EncoderConfig: stage_beta shorter than stage count");
}

std::size_t EncoderConfig::stage_input_dim(std::size_t s) const {
  return feature_expansion ? init_dim << (s - 1) : init_dim;
}

std::size_t EncoderConfig::stage_output_dim(std::size_t s) const {
  return feature_expansion ? init_dim << s : init_dim;
}

std::size_t EncoderConfig::global_dim() const {
  const std::size_t d = stage_output_dim(stages);
  return global_pooling == GlobalPooling::ConcatMaxAvg ? 2 * d : d;
}

PosEParams EncoderConfig::stage_pose(std::size_t s) const {
  PosEParams pose;
  pose.dim = stage_output_dim(s);
  pose.alpha = stage_alpha.empty() ? alpha : stage_alpha[s - 1];
  pose.beta = stage_beta.empty() ? beta : stage_beta[s - 1];
  return pose;
}

StagePointSet raw_point_embed(const PointCloud& cloud, const EncoderConfig& cfg) {
  cloud.validate();
  cfg.validate();
  StagePointSet out;
  out.coords = cloud.points;
  out.feats = pos_e_batch(cloud.points, PosEParams{cfg.init_dim, cfg.alpha, cfg.beta});
  return out;
}

Matrix expand_features(std::span<const double> center_feat, const Matrix& neighbor_feats) {
  const std::size_t c = center_feat.size();
  if (c == 0 || neighbor_feats.cols != c)
    throw std::invalid_argument("expand_features: center/neighbor dimension mismatch");
  Matrix out(neighbor_feats.rows, 2 * c);
  for (std::size_t j = 0; j < neighbor_feats.rows; ++j) {
    auto dst = out.row(j);
    std::copy(center_feat.begin(), center_feat.end(), dst.begin());
    auto src = neighbor_feats.row(j);
    std::copy(src.begin(), src.end(), dst.begin() + c);
  }
  return out;
}

Matrix weigh_neighbors(const Matrix& expanded, std::span<const Vec3> delta_p,
                       const PosEParams& pose) {
  if (pose.dim != expanded.cols)
    throw std::invalid_argument("weigh_neighbors: pose dim must equal expanded feature dim");
  if (delta_p.size() != expanded.rows)
    throw std::invalid_argument("weigh_neighbors: delta_p row mismatch");
  Matrix enc = pos_e_batch(delta_p, pose);
  Matrix out(expanded.rows, expanded.cols);
  for (std::size_t j = 0; j < expanded.rows; ++j) {
    auto f = expanded.row(j);
    auto e = enc.row(j);
    auto w = out.row(j);
    for (std::size_t c = 0; c < expanded.cols; ++c) w[c] = (f[c] + e[c]) * e[c];
  }
  return out;
}

std::vector<double> pool_neighborhood(const Matrix& weighted, StagePooling mode) {
  if (weighted.rows == 0 || weighted.cols == 0)
    throw std::invalid_argument("pool_neighborhood: empty input");
  const std::size_t d = weighted.cols;
  std::vector<double> maxv(d, -std::numeric_limits<double>::infinity());
  std::vector<double> sum(d, 0.0);
  for (std::size_t j = 0; j < weighted.rows; ++j) {
    auto row = weighted.row(j);
    for (std::size_t c = 0; c < d; ++c) {
      maxv[c] = std::max(maxv[c], row[c]);
      sum[c] += row[c];
    }
  }
  const double inv_k = 1.0 / static_cast<double>(weighted.rows);
  std::vector<double> out(d);
  switch (mode) {
    case StagePooling::Max:
      out = maxv;
      break;
    case StagePooling::Avg:
      for (std::size_t c = 0; c < d; ++c) out[c] = sum[c] * inv_k;
      break;
    case StagePooling::MaxPlusAvg:
      for (std::size_t c = 0; c < d; ++c) out[c] = maxv[c] + sum[c] * inv_k;
      break;
  }
  return out;
}

StagePointSet encode_stage(const StagePointSet& input, const EncoderConfig& cfg,
                           std::size_t stage_index, std::vector<std::string>* warnings) {
  input.validate();
  cfg.validate();
  if (stage_index < 1 || stage_index > cfg.stages)
    throw std::invalid_argument("encode_stage: stage index out of range");
  const std::size_t m_in = input.size();
  const std::size_t c_in = input.feats.cols;
  const std::size_t m_out = (m_in + 1) / 2;

  std::size_t k = cfg.neighbors;
  if (k > m_in) {
    k = m_in;
    if (warnings)
      warnings->push_back("encode_stage: clamped neighbors to " + std::to_string(k) +
                          " available points at stage " + std::to_string(stage_index));
  }

  PointCloud input_cloud{input.coords};
  const std::vector<std::uint32_t> centers = farthest_point_sample(input_cloud, m_out);

  PointCloud center_cloud;
  center_cloud.points.reserve(m_out);
  for (std::uint32_t c : centers) center_cloud.points.push_back(input.coords[c]);

  const NeighborIndex nbrs = cfg.grouping == Grouping::kNN
                                 ? knn(center_cloud, input_cloud, k)
                                 : ball_query(center_cloud, input_cloud, cfg.ball_radius, k);

  const PosEParams pose = cfg.stage_pose(stage_index);
  const std::size_t d = pose.dim;  // expanded width
  const std::vector<double> freqs = pose_frequencies(pose);

  StagePointSet out;
  out.coords = std::move(center_cloud.points);
  out.feats = Matrix(m_out, d);

  const std::int64_t sm = static_cast<std::int64_t>(m_out);
#pragma omp parallel
  {
    // per-thread scratch
    std::vector<Vec3> nbr_coords(k);
    Matrix expanded(k, d);
    std::vector<double> enc(k * d);
    std::vector<double> maxv(d), sum(d);

#pragma omp for schedule(static)
    for (std::int64_t ci = 0; ci < sm; ++ci) {
      const std::uint32_t center = centers[static_cast<std::size_t>(ci)];
      const auto row = nbrs.row(static_cast<std::size_t>(ci));
      auto center_feat = input.feats.row(center);

      for (std::size_t j = 0; j < k; ++j) nbr_coords[j] = input.coords[row[j]];
      const std::vector<Vec3> delta = normalize_neighborhood(input.coords[center], nbr_coords);

      for (std::size_t j = 0; j < k; ++j) {
        auto dst = expanded.row(j);
        auto nf = input.feats.row(row[j]);
        if (cfg.feature_expansion) {
          std::copy(center_feat.begin(), center_feat.end(), dst.begin());
          std::copy(nf.begin(), nf.end(), dst.begin() + c_in);
        } else {
          std::copy(nf.begin(), nf.end(), dst.begin());
        }
      }

      detail::pos_e_kernel(delta.data(), k, d, freqs.data(), enc.data());

      // weigh then pool in one pass; matches weigh_neighbors + pool_neighborhood
      std::fill(maxv.begin(), maxv.end(), -std::numeric_limits<double>::infinity());
      std::fill(sum.begin(), sum.end(), 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        auto f = expanded.row(j);
        const double* e = enc.data() + j * d;
        for (std::size_t c = 0; c < d; ++c) {
          const double w = (f[c] + e[c]) * e[c];
          maxv[c] = std::max(maxv[c], w);
          sum[c] += w;
        }
      }
      const double inv_k = 1.0 / static_cast<double>(k);
      auto dst = out.feats.row(static_cast<std::size_t>(ci));
      switch (cfg.stage_pooling) {
        case StagePooling::Max:
          std::copy(maxv.begin(), maxv.end(), dst.begin());
          break;
        case StagePooling::Avg:
          for (std::size_t c = 0; c < d; ++c) dst[c] = sum[c] * inv_k;
          break;
        case StagePooling::MaxPlusAvg:
          for (std::size_t c = 0; c < d; ++c) dst[c] = maxv[c] + sum[c] * inv_k;
          break;
      }
    }
  }
  return out;
}

std::vector<StagePointSet> encode_stages(const PointCloud& cloud, const EncoderConfig& cfg,
                                         std::vector<std::string>* warnings) {
  std::vector<StagePointSet> levels;
  levels.reserve(cfg.stages + 1);
  levels.push_back(raw_point_embed(cloud, cfg));
  for (std::size_t s = 1; s <= cfg.stages; ++s)
    levels.push_back(encode_stage(levels.back(), cfg, s, warnings));
  return levels;
}

GlobalFeature encode_global(const PointCloud& cloud, const EncoderConfig& cfg,
                            std::vector<std::string>* warnings) {
  const std::vector<StagePointSet> levels = encode_stages(cloud, cfg, warnings);
  const Matrix& feats = levels.back().feats;

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

}  // namespace pointnp
