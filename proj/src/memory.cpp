#include "pointnp/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pointnp {

std::uint32_t Logits::argmax() const {
  if (scores.empty()) throw std::invalid_argument("Logits: empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<std::uint32_t>(best);
}

MemoryBank build_bank(const Matrix& features, std::span<const std::uint32_t> labels,
                      std::size_t num_classes, double gamma,
                      std::vector<std::string> class_names) {
  if (features.rows == 0 || features.cols == 0)
    throw std::invalid_argument("build_bank: empty feature matrix");
  if (labels.size() != features.rows)
    throw std::invalid_argument("build_bank: label count does not match feature rows");
  if (num_classes == 0) throw std::invalid_argument("build_bank: num_classes must be >= 1");
  // gamma == 0 is the degenerate setting where prediction collapses to class
  // counts; it is allowed so that behaviour stays testable.
  if (!(gamma >= 0.0)) throw std::invalid_argument("build_bank: gamma must be nonnegative");
  if (!class_names.empty() && class_names.size() != num_classes)
    throw std::invalid_argument("build_bank: class_names size mismatch");

  MemoryBank bank;
  bank.dim = features.cols;
  bank.num_classes = num_classes;
  bank.gamma = static_cast<float>(gamma);
  bank.feat_mem.resize(features.rows * features.cols);
  bank.labels.assign(labels.begin(), labels.end());
  if (class_names.empty()) {
    for (std::size_t c = 0; c < num_classes; ++c)
      bank.class_names.push_back("class_" + std::to_string(c));
  } else {
    bank.class_names = std::move(class_names);
  }

  for (std::size_t i = 0; i < features.rows; ++i) {
    if (labels[i] >= num_classes)
      throw std::invalid_argument("build_bank: label out of range at sample " + std::to_string(i));
    auto row = features.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (!(sq > 0.0))
      throw std::invalid_argument("build_bank: zero-norm feature row at sample " +
                                  std::to_string(i));
    const double inv = 1.0 / std::sqrt(sq);
    float* dst = bank.feat_mem.data() + i * bank.dim;
    for (std::size_t c = 0; c < bank.dim; ++c) dst[c] = static_cast<float>(row[c] * inv);
  }
  return bank;
}

double phi(double x, double gamma) { return std::exp(-gamma * (1.0 - x)); }

namespace {

std::vector<double> normalized_test(std::span<const double> test_feat, std::size_t dim) {
  if (test_feat.size() != dim)
    throw std::invalid_argument("predict: test feature dimension mismatch");
  double sq = 0.0;
  for (double v : test_feat) sq += v * v;
  if (!(sq > 0.0)) throw std::invalid_argument("predict: zero test feature");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<double> t(dim);
  for (std::size_t c = 0; c < dim; ++c) t[c] = test_feat[c] * inv;
  return t;
}

}  // namespace

std::vector<double> bank_similarities(std::span<const double> test_feat, const MemoryBank& bank,
                                      SimilarityMetric metric) {
  const std::size_t n = bank.size();
  std::vector<double> sims(n);
  const std::int64_t sn = static_cast<std::int64_t>(n);
  if (metric == SimilarityMetric::Cosine) {
    const std::vector<double> t = normalized_test(test_feat, bank.dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) {
      const float* row = bank.feat_mem.data() + static_cast<std::size_t>(i) * bank.dim;
      double s = 0.0;
      for (std::size_t c = 0; c < bank.dim; ++c) s += t[c] * static_cast<double>(row[c]);
      sims[i] = s;
    }
    return sims;
  }
  // Distance-based ablation metrics compare the L2-normalized test feature
  // against the normalized rows; similarity = -distance.
  const std::vector<double> t = normalized_test(test_feat, bank.dim);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sn; ++i) {
    const float* row = bank.feat_mem.data() + static_cast<std::size_t>(i) * bank.dim;
    double acc = 0.0;
    switch (metric) {
      case SimilarityMetric::Euclidean:
        for (std::size_t c = 0; c < bank.dim; ++c) {
          const double d = t[c] - static_cast<double>(row[c]);
          acc += d * d;
        }
        acc = std::sqrt(acc);
        break;
      case SimilarityMetric::Manhattan:
        for (std::size_t c = 0; c < bank.dim; ++c)
          acc += std::abs(t[c] - static_cast<double>(row[c]));
        break;
      case SimilarityMetric::Chebyshev:
        for (std::size_t c = 0; c < bank.dim; ++c)
          acc = std::max(acc, std::abs(t[c] - static_cast<double>(row[c])));
        break;
      case SimilarityMetric::Cosine:
        break;  // handled above
    }
    sims[i] = -acc;
  }
  return sims;
}

Logits predict(std::span<const double> test_feat, const MemoryBank& bank,
               SimilarityMetric metric) {
  const std::vector<double> sims = bank_similarities(test_feat, bank, metric);
  const double gamma = static_cast<double>(bank.gamma);
  Logits out;
  out.scores.assign(bank.num_classes, 0.0);
  for (std::size_t i = 0; i < sims.size(); ++i) out.scores[bank.labels[i]] += phi(sims[i], gamma);
  return out;
}

namespace {

// sample indices ordered by descending similarity, ties by smaller index
std::vector<std::uint32_t> ranked_by_similarity(const std::vector<double>& sims) {
  std::vector<std::uint32_t> order(sims.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  return order;
}

}  // namespace

Logits predict_topk(std::span<const double> test_feat, const MemoryBank& bank, std::size_t top_k,
                    SimilarityMetric metric) {
  if (top_k < 1 || top_k > bank.size())
    throw std::invalid_argument("predict_topk: top_k out of range");
  const std::vector<double> sims = bank_similarities(test_feat, bank, metric);
  const std::vector<std::uint32_t> order = ranked_by_similarity(sims);
  const double gamma = static_cast<double>(bank.gamma);
  Logits out;
  out.scores.assign(bank.num_classes, 0.0);
  for (std::size_t r = 0; r < top_k; ++r) {
    const std::uint32_t i = order[r];
    out.scores[bank.labels[i]] += phi(sims[i], gamma);
  }
  return out;
}

std::uint32_t knn_classify(std::span<const double> test_feat, const MemoryBank& bank,
                           std::size_t k, SimilarityMetric metric) {
  if (k < 1 || k > bank.size()) throw std::invalid_argument("knn_classify: k out of range");
  const std::vector<double> sims = bank_similarities(test_feat, bank, metric);
  const std::vector<std::uint32_t> order = ranked_by_similarity(sims);

  std::vector<std::size_t> votes(bank.num_classes, 0);
  for (std::size_t r = 0; r < k; ++r) ++votes[bank.labels[order[r]]];
  const std::size_t max_votes = *std::max_element(votes.begin(), votes.end());
  // tie: first sample in similarity order whose class holds the max vote
  for (std::size_t r = 0; r < k; ++r) {
    const std::uint32_t cls = bank.labels[order[r]];
    if (votes[cls] == max_votes) return cls;
  }
  return bank.labels[order[0]];  // unreachable
}

Logits fuse_logits(const Logits& a, const Logits& b, double lambda) {
  if (a.size() != b.size()) throw std::invalid_argument("fuse_logits: dimension mismatch");
  if (!(lambda >= 0.0) || !(lambda <= 1.0))
    throw std::invalid_argument("fuse_logits: lambda must be in [0, 1]");
  Logits out;
  out.scores.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.scores[i] = lambda * a.scores[i] + (1.0 - lambda) * b.scores[i];
  return out;
}

Logits softmax(const Logits& logits) {
  if (logits.scores.empty()) throw std::invalid_argument("softmax: empty logits");
  const double m = *std::max_element(logits.scores.begin(), logits.scores.end());
  Logits out;
  out.scores.resize(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.scores[i] = std::exp(logits.scores[i] - m);
    z += out.scores[i];
  }
  for (double& v : out.scores) v /= z;
  return out;
}

}  // namespace pointnp
