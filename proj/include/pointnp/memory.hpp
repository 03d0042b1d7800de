#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointnp/types.hpp"

namespace pointnp {

/// Per-class score vector; entries are nonnegative when produced by predict.
struct Logits {
  std::vector<double> scores;

  std::size_t size() const { return scores.size(); }
  std::uint32_t argmax() const;
};

enum class SimilarityMetric { Cosine, Euclidean, Manhattan, Chebyshev };

/// Cached training-set memory: one L2-normalized feature row plus a class
/// label per sample. The one-hot label matrix is kept implicitly as label
/// indices (each row of the implied matrix has exactly one 1). Feature rows
/// are stored as float32, matching the on-disk bank format bit for bit.
struct MemoryBank {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<float> feat_mem;          // size() == size_samples * dim, rows L2-normalized
  std::vector<std::uint32_t> labels;    // class index per row
  float gamma = 100.0f;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::span<const float> feat_row(std::size_t i) const { return {feat_mem.data() + i * dim, dim}; }
};

/// Builds the bank from raw (unnormalized) feature rows and class labels.
/// Rows are L2-normalized here so prediction is a single matrix product.
/// Throws on zero-norm rows (naming the sample), out-of-range labels, or
/// nonpositive gamma. Empty class_names defaults to "class_<i>".
MemoryBank build_bank(const Matrix& features, std::span<const std::uint32_t> labels,
                      std::size_t num_classes, double gamma,
                      std::vector<std::string> class_names = {});

/// Sharpening activation exp(-gamma * (1 - x)).
double phi(double x, double gamma);

/// Similarity scores of the test feature against every bank row (cosine by
/// default; the alternatives are ablation metrics where larger still means
/// more similar, i.e. negated distances).
std::vector<double> bank_similarities(std::span<const double> test_feat, const MemoryBank& bank,
                                      SimilarityMetric metric = SimilarityMetric::Cosine);

/// Soft label integration: logits_k = sum over samples of class k of
/// phi(similarity). Throws on a zero test feature.
Logits predict(std::span<const double> test_feat, const MemoryBank& bank,
               SimilarityMetric metric = SimilarityMetric::Cosine);

/// As predict, but only the top_k most similar samples contribute (similarity
/// ties broken by smaller sample index).
Logits predict_topk(std::span<const double> test_feat, const MemoryBank& bank, std::size_t top_k,
                    SimilarityMetric metric = SimilarityMetric::Cosine);

/// Hard assignment: majority class among the k most similar samples; vote
/// ties resolve to the class of the most similar sample among the tied ones.
std::uint32_t knn_classify(std::span<const double> test_feat, const MemoryBank& bank,
                           std::size_t k, SimilarityMetric metric = SimilarityMetric::Cosine);

/// lambda * a + (1 - lambda) * b, elementwise.
Logits fuse_logits(const Logits& a, const Logits& b, double lambda = 0.5);

/// Numerically-stable softmax, used by the fuse CLI when requested.
Logits softmax(const Logits& logits);

}  // namespace pointnp
