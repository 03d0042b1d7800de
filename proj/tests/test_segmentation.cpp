#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pointnp/dataset.hpp"
#include "pointnp/geometry.hpp"
#include "pointnp/rng.hpp"
#include "pointnp/segmentation.hpp"

using namespace pointnp;

TEST_SUITE_BEGIN("segmentation");

namespace {

EncoderConfig tiny_seg_config() {
  EncoderConfig cfg;
  cfg.stages = 2;
  cfg.init_dim = 12;
  cfg.neighbors = 8;
  return cfg;
}

// two separable blobs along the x axis, labels 0/1
std::pair<PointCloud, std::vector<std::uint32_t>> two_part_object(Rng& rng, std::size_t per_part) {
  PointCloud cloud;
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < 2 * per_part; ++i) {
    const bool right = i >= per_part;
    cloud.points.push_back({(right ? 0.7 : -0.7) + 0.15 * rng.uniform(-1, 1),
                            0.3 * rng.uniform(-1, 1), 0.3 * rng.uniform(-1, 1)});
    labels.push_back(right ? 1 : 0);
  }
  return {cloud, labels};
}

}  // namespace

TEST_CASE("seg defaults follow the segmentation setting") {
  const EncoderConfig cfg = seg_encoder_defaults();
  CHECK(cfg.stages == 5);
  CHECK(cfg.init_dim == 144);
  CHECK(cfg.neighbors == 128);
}

TEST_CASE("propagate interpolates with inverse distance weights") {
  Rng rng(501);
  StagePointSet coarse;
  coarse.coords = oracle::random_cloud(rng, 7).points;
  coarse.feats = oracle::random_matrix(rng, 7, 5);
  PointCloud fine = oracle::random_cloud(rng, 13);
  Matrix skip = oracle::random_matrix(rng, 13, 3);

  const StagePointSet out = propagate(coarse, fine.points, skip);
  CHECK(out.size() == 13);
  CHECK(out.feats.cols == 8);

  std::vector<std::vector<double>> coarse_rows;
  for (std::size_t i = 0; i < 7; ++i) {
    auto row = coarse.feats.row(i);
    coarse_rows.emplace_back(row.begin(), row.end());
  }
  const auto want = oracle::propagate_interp(coarse.coords, coarse_rows, fine.points);
  for (std::size_t i = 0; i < 13; ++i) {
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(out.feats.at(i, c) == doctest::Approx(want[i][c]).epsilon(1e-9));
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.feats.at(i, 5 + c) == skip.at(i, c));
  }
}

TEST_CASE("propagate at a coincident point returns that coarse feature") {
  Rng rng(502);
  StagePointSet coarse;
  coarse.coords = oracle::random_cloud(rng, 6).points;
  coarse.feats = oracle::random_matrix(rng, 6, 4);
  std::vector<Vec3> fine{coarse.coords[2]};
  Matrix skip(1, 1);
  const StagePointSet out = propagate(coarse, fine, skip);
  for (std::size_t c = 0; c < 4; ++c)
    CHECK(std::abs(out.feats.at(0, c) - coarse.feats.at(2, c)) < 1e-4);
}

TEST_CASE("propagate with constant coarse features is constant") {
  Rng rng(503);
  StagePointSet coarse;
  coarse.coords = oracle::random_cloud(rng, 5).points;
  coarse.feats = Matrix(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 3; ++c) coarse.feats.at(i, c) = 1.0 + static_cast<double>(c);
  PointCloud fine = oracle::random_cloud(rng, 9);
  Matrix skip(9, 1);
  const StagePointSet out = propagate(coarse, fine.points, skip);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(out.feats.at(i, c) == doctest::Approx(1.0 + c).epsilon(1e-9));
}

TEST_CASE("propagate uses all coarse points when fewer than 3") {
  Rng rng(504);
  StagePointSet coarse;
  coarse.coords = {{0, 0, 0}, {1, 0, 0}};
  coarse.feats = oracle::random_matrix(rng, 2, 2);
  std::vector<Vec3> fine{{0.5, 0, 0}};
  Matrix skip(1, 1);
  const StagePointSet out = propagate(coarse, fine, skip);
  // equidistant: plain average
  for (std::size_t c = 0; c < 2; ++c)
    CHECK(out.feats.at(0, c) ==
          doctest::Approx(0.5 * (coarse.feats.at(0, c) + coarse.feats.at(1, c))).epsilon(1e-9));
}

TEST_CASE("propagate output is a convex combination per channel") {
  Rng rng(505);
  StagePointSet coarse;
  coarse.coords = oracle::random_cloud(rng, 10).points;
  coarse.feats = oracle::random_matrix(rng, 10, 6);
  PointCloud fine = oracle::random_cloud(rng, 25);
  Matrix skip(25, 1);
  const StagePointSet out = propagate(coarse, fine.points, skip);
  double lo = *std::min_element(coarse.feats.data.begin(), coarse.feats.data.end());
  double hi = *std::max_element(coarse.feats.data.begin(), coarse.feats.data.end());
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(out.feats.at(i, c) >= lo - 1e-6);
      CHECK(out.feats.at(i, c) <= hi + 1e-6);
    }
}

TEST_CASE("encode_pointwise yields one row per input point") {
  Rng rng(506);
  const EncoderConfig cfg = tiny_seg_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 30));
  const StagePointSet out = encode_pointwise(c, cfg);
  CHECK(out.size() == 30);
  CHECK(out.coords == c.points);
  // final dim: last stage width plus every skip level
  const std::size_t want_dim =
      (cfg.init_dim << cfg.stages) + (cfg.init_dim << 1) + cfg.init_dim;
  CHECK(out.feats.cols == want_dim);
  CHECK(out.feats.all_finite());
}

TEST_CASE("encode_pointwise rows permute with the input") {
  Rng rng(507);
  const EncoderConfig cfg = tiny_seg_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 24));
  const StagePointSet base = encode_pointwise(c, cfg);

  std::vector<std::uint32_t> perm(24);
  std::iota(perm.begin(), perm.end(), 0u);
  rng.shuffle(perm);
  PointCloud shuffled;
  for (auto p : perm) shuffled.points.push_back(c.points[p]);
  const StagePointSet permuted = encode_pointwise(shuffled, cfg);

  for (std::size_t i = 0; i < 24; ++i) {
    auto a = base.feats.row(perm[i]);
    auto b = permuted.feats.row(i);
    double diff = 0.0;
    for (std::size_t cix = 0; cix < a.size(); ++cix) diff = std::max(diff, std::abs(a[cix] - b[cix]));
    CHECK(diff < 1e-5);
  }
}

TEST_CASE("well-separated clusters have higher within-cluster similarity") {
  Rng rng(508);
  const EncoderConfig cfg = tiny_seg_config();
  auto [cloud, labels] = two_part_object(rng, 16);
  const PointCloud normalized = normalize_cloud(cloud);
  const StagePointSet pw = encode_pointwise(normalized, cfg);

  auto cosine = [&](std::size_t a, std::size_t b) {
    double ab = 0, aa = 0, bb = 0;
    auto ra = pw.feats.row(a), rb = pw.feats.row(b);
    for (std::size_t c = 0; c < ra.size(); ++c) {
      ab += ra[c] * rb[c];
      aa += ra[c] * ra[c];
      bb += rb[c] * rb[c];
    }
    return ab / std::sqrt(aa * bb);
  };
  double within = 0, across = 0;
  std::size_t nw = 0, na = 0;
  for (std::size_t i = 0; i < pw.size(); i += 3)
    for (std::size_t j = i + 1; j < pw.size(); j += 3) {
      if (labels[i] == labels[j])
        within += cosine(i, j), ++nw;
      else
        across += cosine(i, j), ++na;
    }
  CHECK(within / static_cast<double>(nw) > across / static_cast<double>(na));
}

TEST_CASE("build_part_bank groups by (object, part)") {
  Rng rng(509);
  const EncoderConfig cfg = tiny_seg_config();
  std::vector<PointCloud> clouds;
  std::vector<std::vector<std::uint32_t>> labels;
  for (int obj = 0; obj < 2; ++obj) {
    auto [cloud, lab] = two_part_object(rng, 10);
    clouds.push_back(normalize_cloud(cloud));
    labels.push_back(lab);
  }
  const PartBank bank = build_part_bank(clouds, labels, 2, cfg, 100.0);
  CHECK(bank.rows() == 4);  // 2 objects x 2 parts
  CHECK(bank.part_labels == std::vector<std::uint32_t>{0, 1, 0, 1});
  for (std::size_t r = 0; r < bank.rows(); ++r) {
    double sq = 0.0;
    for (float v : bank.feat_row(r)) sq += static_cast<double>(v) * static_cast<double>(v);
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-6);
  }

  // group-by-mean oracle on the same encodings
  std::vector<std::vector<std::vector<double>>> obj_feats;
  for (const PointCloud& c : clouds) {
    const StagePointSet pw = encode_pointwise(c, cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pw.size(); ++i) {
      auto row = pw.feats.row(i);
      rows.emplace_back(row.begin(), row.end());
    }
    obj_feats.push_back(std::move(rows));
  }
  const auto means = oracle::part_group_means(obj_feats, labels);
  std::size_t bank_row = 0;
  for (std::size_t obj = 0; obj < 2; ++obj)
    for (std::uint32_t part = 0; part < 2; ++part) {
      const auto& mean = means.at({obj, part});
      double norm2 = 0.0;
      for (double v : mean) norm2 += v * v;
      const double inv = 1.0 / std::sqrt(norm2);
      auto got = bank.feat_row(bank_row++);
      for (std::size_t c = 0; c < mean.size(); ++c)
        CHECK(static_cast<double>(got[c]) == doctest::Approx(mean[c] * inv).epsilon(1e-5));
    }
}

TEST_CASE("build_part_bank single part and error paths") {
  Rng rng(510);
  const EncoderConfig cfg = tiny_seg_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 12));
  std::vector<std::vector<std::uint32_t>> labels{std::vector<std::uint32_t>(12, 0)};
  const PartBank bank = build_part_bank({{c}}, labels, 1, cfg, 100.0);
  CHECK(bank.rows() == 1);

  std::vector<std::vector<std::uint32_t>> bad{std::vector<std::uint32_t>(12, 5)};
  CHECK_THROWS_AS(build_part_bank({{c}}, bad, 2, cfg, 100.0), std::invalid_argument);
  std::vector<std::vector<std::uint32_t>> short_lab{std::vector<std::uint32_t>(4, 0)};
  CHECK_THROWS_AS(build_part_bank({{c}}, short_lab, 1, cfg, 100.0), std::invalid_argument);
}

TEST_CASE("segment recovers the labels of its own training object") {
  Rng rng(511);
  const EncoderConfig cfg = tiny_seg_config();
  auto [cloud, labels] = two_part_object(rng, 20);
  const PointCloud normalized = normalize_cloud(cloud);
  std::vector<std::vector<std::uint32_t>> label_set{labels};
  const PartBank bank = build_part_bank({{normalized}}, label_set, 2, cfg, 100.0);
  const auto pred = segment(normalized, bank, cfg);
  CHECK(accuracy(pred, labels) == 100.0);
}

TEST_CASE("segment with a single-part bank labels everything that part") {
  Rng rng(512);
  const EncoderConfig cfg = tiny_seg_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 15));
  std::vector<std::vector<std::uint32_t>> labels{std::vector<std::uint32_t>(15, 0)};
  const PartBank bank = build_part_bank({{c}}, labels, 1, cfg, 100.0);
  PointCloud other = normalize_cloud(oracle::random_cloud(rng, 9));
  for (std::uint32_t l : segment(other, bank, cfg)) CHECK(l == 0);
}

TEST_CASE("segment respects the category part range") {
  // hand-made bank with orthogonal prototypes; rows 0/1 belong to "rod",
  // row 2 to "disk"
  PartBank bank;
  bank.dim = 4;
  bank.num_parts = 3;
  bank.part_names = {"rod/top", "rod/bottom", "disk/face"};
  bank.part_labels = {0, 1, 2};
  bank.part_feats = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  bank.gamma = 100.0f;

  const auto rod_parts = part_range_for_category(bank, "rod");
  CHECK(rod_parts == std::vector<std::uint32_t>{0, 1});
  CHECK(part_range_for_category(bank, "girder").empty());
}

TEST_CASE("instance_miou") {
  const std::vector<std::uint32_t> parts{0, 1};
  SUBCASE("perfect prediction") {
    std::vector<std::uint32_t> p{0, 0, 1, 1};
    CHECK(instance_miou(p, p, parts) == 100.0);
  }
  SUBCASE("fully disjoint single-part predictions") {
    std::vector<std::uint32_t> pred{0, 0, 0, 0};
    std::vector<std::uint32_t> truth{1, 1, 1, 1};
    CHECK(instance_miou(pred, truth, parts) == 0.0);
  }
  SUBCASE("half overlap on one part, other absent from both") {
    // part 0: pred {a,b}, truth {b,c} -> IoU 1/3; part 1 absent -> IoU 1
    std::vector<std::uint32_t> pred{0, 0, 2};
    std::vector<std::uint32_t> truth{2, 0, 0};
    const double want = 0.5 * (100.0 / 3.0 + 100.0);
    CHECK(instance_miou(pred, truth, parts) == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("bounds and errors") {
    std::vector<std::uint32_t> pred{0, 1, 1};
    std::vector<std::uint32_t> truth{1, 1, 0};
    const double v = instance_miou(pred, truth, parts);
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
    std::vector<std::uint32_t> short_truth{0};
    CHECK_THROWS_AS(instance_miou(pred, short_truth, parts), std::invalid_argument);
  }
}

TEST_SUITE_END();
