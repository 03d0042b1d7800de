#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pointnp/geometry.hpp"
#include "pointnp/pose.hpp"
#include "pointnp/types.hpp"

namespace pointnp {

enum class Grouping { kNN, BallQuery };
enum class StagePooling { Max, Avg, MaxPlusAvg };
enum class GlobalPooling { MaxPlusAvg, ConcatMaxAvg };

/// Non-parametric encoder configuration. Defaults are the shape-classification
/// setting: 4 stages, initial dim 72 (doubling per stage to a 1152-dim global
/// feature under max+avg pooling), 90 neighbors, alpha 1000, beta 100.
struct EncoderConfig {
  std::size_t stages = 4;
  std::size_t init_dim = 72;
  std::size_t neighbors = 90;
  double alpha = 1000.0;
  double beta = 100.0;
  Grouping grouping = Grouping::kNN;
  double ball_radius = 0.2;  // only used with Grouping::BallQuery
  StagePooling stage_pooling = StagePooling::MaxPlusAvg;
  GlobalPooling global_pooling = GlobalPooling::MaxPlusAvg;
  bool feature_expansion = true;
  // optional per-stage overrides (index s-1); empty means use alpha/beta
  std::vector<double> stage_alpha;
  std::vector<double> stage_beta;

  void validate() const;

  /// Feature width entering stage s (1-based).
  std::size_t stage_input_dim(std::size_t s) const;
  /// Feature width leaving stage s, i.e. the PosE dim used for weighting.
  std::size_t stage_output_dim(std::size_t s) const;
  /// Dimension of the global feature.
  std::size_t global_dim() const;
  PosEParams stage_pose(std::size_t s) const;
};

/// Embeds raw coordinates as their positional encodings; coords pass through.
/// The cloud is expected to be normalized already (see normalize_cloud).
StagePointSet raw_point_embed(const PointCloud& cloud, const EncoderConfig& cfg);

/// Row j = Concat(center_feat, neighbor_feats[j]).
Matrix expand_features(std::span<const double> center_feat, const Matrix& neighbor_feats);

/// Row j = (expanded[j] + e_j) ⊙ e_j with e_j = pos_e(delta_p[j], pose).
Matrix weigh_neighbors(const Matrix& expanded, std::span<const Vec3> delta_p,
                       const PosEParams& pose);

/// Columnwise aggregation over the neighborhood: max, mean, or their sum.
std::vector<double> pool_neighborhood(const Matrix& weighted, StagePooling mode);

/// One encoder stage: FPS to ceil(M/2) centers, neighbor grouping over the
/// input set, feature expansion, relative-position weighting, pooling.
/// cfg.neighbors is clamped to the available point count (a note is appended
/// to `warnings` when given) rather than failing on small clouds.
StagePointSet encode_stage(const StagePointSet& input, const EncoderConfig& cfg,
                           std::size_t stage_index, std::vector<std::string>* warnings = nullptr);

/// All intermediate stage outputs: result[0] is the raw embedding, result[s]
/// the output of stage s. Needed by the segmentation decoder.
std::vector<StagePointSet> encode_stages(const PointCloud& cloud, const EncoderConfig& cfg,
                                         std::vector<std::string>* warnings = nullptr);

/// Full pipeline: raw embedding, all stages, global pooling.
GlobalFeature encode_global(const PointCloud& cloud, const EncoderConfig& cfg,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace pointnp
