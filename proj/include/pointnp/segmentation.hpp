#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointnp/encoder.hpp"
#include "pointnp/types.hpp"

namespace pointnp {

/// Part-wise feature memory: one L2-normalized mean feature row per
/// (training object, part label) group.
struct PartBank {
  std::size_t dim = 0;
  std::size_t num_parts = 0;
  std::vector<float> part_feats;          // rows() * dim
  std::vector<std::uint32_t> part_labels; // part class per row
  float gamma = 100.0f;
  std::vector<std::string> part_names;    // "category/part" by convention

  std::size_t rows() const { return part_labels.size(); }
  std::span<const float> feat_row(std::size_t i) const {
    return {part_feats.data() + i * dim, dim};
  }
};

/// Segmentation encoder defaults: 5 stages, initial dim 144, 128 neighbors.
EncoderConfig seg_encoder_defaults();

/// Upsampling step of the decoder: each fine point takes the inverse-distance
/// weighted mean of its 3 nearest coarse features (all of them when fewer than
/// 3 exist, eps = 1e-8), concatenated with its skip feature row.
StagePointSet propagate(const StagePointSet& coarse, std::span<const Vec3> fine_coords,
                        const Matrix& skip_feats);

/// Encoder plus mirrored decoder with per-stage skip concatenation; yields one
/// feature row per input point.
StagePointSet encode_pointwise(const PointCloud& cloud, const EncoderConfig& cfg,
                               std::vector<std::string>* warnings = nullptr);

/// Mean point feature per (object, part) over the training set, L2-normalized.
/// point_labels[i] aligns with clouds[i]; parts claimed by no point are simply
/// absent from the bank. Empty part_names defaults to "part_<i>".
PartBank build_part_bank(std::span<const PointCloud> clouds,
                         std::span<const std::vector<std::uint32_t>> point_labels,
                         std::size_t num_parts, const EncoderConfig& cfg, double gamma,
                         std::vector<std::string> part_names = {});

/// Rows of the bank whose part name starts with "<category>/".
std::vector<std::uint32_t> part_range_for_category(const PartBank& bank,
                                                   const std::string& category);

/// Point-wise part prediction: encode_pointwise, then similarity matching of
/// each point feature against the bank rows whose part label lies in
/// part_range (empty range = the whole bank).
std::vector<std::uint32_t> segment(const PointCloud& cloud, const PartBank& bank,
                                   const EncoderConfig& cfg,
                                   std::span<const std::uint32_t> part_range = {},
                                   std::vector<std::string>* warnings = nullptr);

/// Mean IoU (%) over the category's part set; parts absent from both pred and
/// truth count as IoU 1. Throws on length mismatch.
double instance_miou(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth,
                     std::span<const std::uint32_t> part_set);

}  // namespace pointnp
