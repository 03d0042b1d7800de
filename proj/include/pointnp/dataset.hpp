#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointnp/encoder.hpp"
#include "pointnp/types.hpp"

namespace pointnp {

struct LabeledDataset {
  std::vector<PointCloud> clouds;
  std::vector<std::uint32_t> labels;
  std::vector<std::string> class_names;
  std::string split;  // "train" or "test"

  std::size_t size() const { return clouds.size(); }
  std::size_t num_classes() const { return class_names.size(); }
  void validate() const;
};

struct FewShotEpisode {
  std::size_t n_way = 0;
  std::size_t k_shot = 0;
  std::uint64_t seed = 0;
  LabeledDataset support;
  LabeledDataset query;
  // positions in the source dataset, so precomputed features can be reused
  std::vector<std::size_t> support_indices;
  std::vector<std::size_t> query_indices;
};

enum class Primitive { Sphere, Cube, Cylinder, Cone, Torus, Plane };

const char* primitive_name(Primitive p);
/// Parses a primitive name; throws on unknown names.
Primitive primitive_from_name(const std::string& name);

/// Deterministic synthetic corpus: per sample, `points` surface samples of the
/// primitive with Gaussian jitter sigma, a random rotation about the z axis,
/// then scaling about the origin so the farthest point has norm 1 (shapes are
/// constructed origin-centered). Each sample owns an RNG stream derived from
/// (seed, class, index), so the dataset is reproducible sample by sample.
LabeledDataset synth_primitives(std::span<const Primitive> classes, std::size_t per_class,
                                std::size_t points, double noise_sigma, std::uint64_t seed);

/// Point clouds with per-point part labels, for the segmentation path.
struct SegDataset {
  std::vector<PointCloud> clouds;
  std::vector<std::vector<std::uint32_t>> point_labels;
  std::vector<std::uint32_t> categories;  // per cloud
  std::vector<std::string> category_names;
  std::vector<std::string> part_names;  // "category/part", index = global part id
};

/// Synthetic two-part segmentation corpus: "rod" objects (cylinders split at
/// the equator into rod/top and rod/bottom) and "ball" objects (spheres split
/// into ball/upper and ball/lower). Same jitter/rotation/scaling treatment as
/// synth_primitives; part labels come from the pre-jitter surface position.
SegDataset synth_part_primitives(std::size_t per_category, std::size_t points,
                                 double noise_sigma, std::uint64_t seed);

/// Uniformly samples n_way classes and, per class, k_shot support plus
/// query_per_class query samples (disjoint). Throws, naming the class, when a
/// selected class has fewer than k_shot + query_per_class samples.
FewShotEpisode sample_episode(const LabeledDataset& dataset, std::size_t n_way,
                              std::size_t k_shot, std::size_t query_per_class,
                              std::uint64_t seed);

/// 100 * matches / N. Throws on length mismatch or empty input.
double accuracy(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth);

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> per_class_count;
  std::vector<std::vector<std::size_t>> confusion;  // confusion[truth][pred]
  std::vector<std::uint32_t> predictions;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double encode_seconds = 0.0;
  double classify_seconds = 0.0;
};

/// Normalizes and encodes every cloud; row i is the global feature of cloud i.
/// Parallel over clouds.
Matrix encode_dataset(const LabeledDataset& dataset, const EncoderConfig& cfg);

/// Bank construction plus test classification on already-encoded features.
/// evaluate_classification delegates here after encoding both splits.
EvalReport evaluate_features(const Matrix& train_feats,
                             std::span<const std::uint32_t> train_labels,
                             const Matrix& test_feats, std::span<const std::uint32_t> test_labels,
                             std::size_t num_classes, double gamma,
                             std::vector<std::string> class_names = {});

/// End-to-end protocol: encode the train split, build the memory bank, encode
/// and classify the test split, aggregate metrics. Deterministic given
/// (datasets, cfg, gamma); timings are wall-clock and reported separately from
/// the deterministic fields.
EvalReport evaluate_classification(const LabeledDataset& train, const LabeledDataset& test,
                                   const EncoderConfig& cfg, double gamma);

}  // namespace pointnp
