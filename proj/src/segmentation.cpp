#include "pointnp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pointnp/memory.hpp"

namespace pointnp {

EncoderConfig seg_encoder_defaults() {
  EncoderConfig cfg;
  cfg.stages = 5;
  cfg.init_dim = 144;
  cfg.neighbors = 128;
  return cfg;
}

StagePointSet propagate(const StagePointSet& coarse, std::span<const Vec3> fine_coords,
                        const Matrix& skip_feats) {
  coarse.validate();
  if (fine_coords.size() != skip_feats.rows)
    throw std::invalid_argument("propagate: fine_coords/skip_feats row mismatch");

  const std::size_t n_fine = fine_coords.size();
  const std::size_t n_coarse = coarse.size();
  const std::size_t n_interp = std::min<std::size_t>(3, n_coarse);
  const std::size_t c_coarse = coarse.feats.cols;
  constexpr double eps = 1e-8;

  StagePointSet out;
  out.coords.assign(fine_coords.begin(), fine_coords.end());
  out.feats = Matrix(n_fine, c_coarse + skip_feats.cols);

  const std::int64_t sn = static_cast<std::int64_t>(n_fine);
#pragma omp parallel
  {
    std::vector<std::pair<double, std::uint32_t>> cand(n_coarse);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) {
      const Vec3& p = fine_coords[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < n_coarse; ++j)
        cand[j] = {squared_distance(p, coarse.coords[j]), static_cast<std::uint32_t>(j)};
      std::partial_sort(cand.begin(), cand.begin() + n_interp, cand.end());

      double wsum = 0.0;
      double w[3];
      for (std::size_t j = 0; j < n_interp; ++j) {
        w[j] = 1.0 / (std::sqrt(cand[j].first) + eps);
        wsum += w[j];
      }

      auto dst = out.feats.row(static_cast<std::size_t>(i));
      for (std::size_t j = 0; j < n_interp; ++j) {
        const double wj = w[j] / wsum;
        auto src = coarse.feats.row(cand[j].second);
        for (std::size_t c = 0; c < c_coarse; ++c) dst[c] += wj * src[c];
      }
      auto skip = skip_feats.row(static_cast<std::size_t>(i));
      std::copy(skip.begin(), skip.end(), dst.begin() + c_coarse);
    }
  }
  return out;
}

StagePointSet encode_pointwise(const PointCloud& cloud, const EncoderConfig& cfg,
                               std::vector<std::string>* warnings) {
  const std::vector<StagePointSet> levels = encode_stages(cloud, cfg, warnings);
  StagePointSet current = levels.back();
  for (std::size_t s = levels.size() - 1; s-- > 0;)
    current = propagate(current, levels[s].coords, levels[s].feats);
  return current;
}

PartBank build_part_bank(std::span<const PointCloud> clouds,
                         std::span<const std::vector<std::uint32_t>> point_labels,
                         std::size_t num_parts, const EncoderConfig& cfg, double gamma,
                         std::vector<std::string> part_names) {
  if (clouds.empty()) throw std::invalid_argument("build_part_bank: no training clouds");
  if (point_labels.size() != clouds.size())
    throw std::invalid_argument("build_part_bank: clouds/labels count mismatch");
  if (num_parts == 0) throw std::invalid_argument("build_part_bank: num_parts must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("build_part_bank: gamma must be nonnegative");
  if (!part_names.empty() && part_names.size() != num_parts)
    throw std::invalid_argument("build_part_bank: part_names size mismatch");

  PartBank bank;
  bank.gamma = static_cast<float>(gamma);
  bank.num_parts = num_parts;
  if (part_names.empty()) {
    for (std::size_t p = 0; p < num_parts; ++p) bank.part_names.push_back("part_" + std::to_string(p));
  } else {
    bank.part_names = std::move(part_names);
  }

  for (std::size_t obj = 0; obj < clouds.size(); ++obj) {
    const std::vector<std::uint32_t>& lab = point_labels[obj];
    if (lab.size() != clouds[obj].size())
      throw std::invalid_argument("build_part_bank: label count mismatch for object " +
                                  std::to_string(obj));
    for (std::uint32_t l : lab)
      if (l >= num_parts)
        throw std::invalid_argument("build_part_bank: part label out of range in object " +
                                    std::to_string(obj));

    const StagePointSet pw = encode_pointwise(clouds[obj], cfg);
    if (bank.dim == 0) bank.dim = pw.feats.cols;

    // group-by part label, ascending
    std::map<std::uint32_t, std::pair<std::vector<double>, std::size_t>> groups;
    for (std::size_t i = 0; i < lab.size(); ++i) {
      auto& [sum, count] = groups
                               .try_emplace(lab[i], std::vector<double>(bank.dim, 0.0),
                                            std::size_t{0})
                               .first->second;
      auto row = pw.feats.row(i);
      for (std::size_t c = 0; c < bank.dim; ++c) sum[c] += row[c];
      ++count;
    }
    for (auto& [part, entry] : groups) {
      auto& [sum, count] = entry;
      double sq = 0.0;
      for (std::size_t c = 0; c < bank.dim; ++c) {
        sum[c] /= static_cast<double>(count);
        sq += sum[c] * sum[c];
      }
      if (!(sq > 0.0))
        throw std::invalid_argument("build_part_bank: zero-norm part feature in object " +
                                    std::to_string(obj));
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t c = 0; c < bank.dim; ++c)
        bank.part_feats.push_back(static_cast<float>(sum[c] * inv));
      bank.part_labels.push_back(part);
    }
  }
  return bank;
}

std::vector<std::uint32_t> part_range_for_category(const PartBank& bank,
                                                   const std::string& category) {
  const std::string prefix = category + "/";
  std::vector<std::uint32_t> parts;
  for (std::size_t p = 0; p < bank.part_names.size(); ++p)
    if (bank.part_names[p].rfind(prefix, 0) == 0) parts.push_back(static_cast<std::uint32_t>(p));
  return parts;
}

std::vector<std::uint32_t> segment(const PointCloud& cloud, const PartBank& bank,
                                   const EncoderConfig& cfg,
                                   std::span<const std::uint32_t> part_range,
                                   std::vector<std::string>* warnings) {
  if (bank.rows() == 0) throw std::invalid_argument("segment: empty part bank");

  // rows of the bank allowed to vote
  std::vector<std::uint32_t> rows;
  if (part_range.empty()) {
    rows.resize(bank.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
  } else {
    for (std::size_t i = 0; i < bank.rows(); ++i) {
      const std::uint32_t l = bank.part_labels[i];
      if (std::find(part_range.begin(), part_range.end(), l) != part_range.end())
        rows.push_back(static_cast<std::uint32_t>(i));
    }
    if (rows.empty()) {
      if (warnings)
        warnings->push_back("segment: part range matches no bank row; using the full bank");
      rows.resize(bank.rows());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<std::uint32_t>(i);
    }
  }

  const StagePointSet pw = encode_pointwise(cloud, cfg, warnings);
  if (pw.feats.cols != bank.dim)
    throw std::invalid_argument("segment: feature dim does not match the bank");

  const double gamma = static_cast<double>(bank.gamma);
  std::vector<std::uint32_t> labels(pw.size());
  const std::int64_t sn = static_cast<std::int64_t>(pw.size());
#pragma omp parallel
  {
    std::vector<double> logits(bank.num_parts);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) {
      auto feat = pw.feats.row(static_cast<std::size_t>(i));
      double sq = 0.0;
      for (double v : feat) sq += v * v;
      const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;

      std::fill(logits.begin(), logits.end(), 0.0);
      for (std::uint32_t r : rows) {
        const float* mem = bank.part_feats.data() + static_cast<std::size_t>(r) * bank.dim;
        double s = 0.0;
        for (std::size_t c = 0; c < bank.dim; ++c)
          s += feat[c] * inv * static_cast<double>(mem[c]);
        logits[bank.part_labels[r]] += phi(s, gamma);
      }
      std::size_t best = bank.part_labels[rows[0]];
      for (std::uint32_t r : rows) {
        const std::uint32_t cls = bank.part_labels[r];
        if (logits[cls] > logits[best]) best = cls;
      }
      labels[i] = static_cast<std::uint32_t>(best);
    }
  }
  return labels;
}

double instance_miou(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth,
                     std::span<const std::uint32_t> part_set) {
  if (pred.size() != truth.size()) throw std::invalid_argument("instance_miou: length mismatch");
  if (part_set.empty()) throw std::invalid_argument("instance_miou: empty part set");

  double total = 0.0;
  for (std::uint32_t part : part_set) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool in_pred = pred[i] == part;
      const bool in_truth = truth[i] == part;
      inter += in_pred && in_truth;
      uni += in_pred || in_truth;
    }
    total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return 100.0 * total / static_cast<double>(part_set.size());
}

}  // namespace pointnp
