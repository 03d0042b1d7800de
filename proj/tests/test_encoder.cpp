#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pointnp/encoder.hpp"
#include "pointnp/geometry.hpp"
#include "pointnp/rng.hpp"

using namespace pointnp;

TEST_SUITE_BEGIN("encoder");

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.stages = 3;
  cfg.init_dim = 12;
  cfg.neighbors = 6;
  return cfg;
}

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("raw_point_embed shapes and values") {
  Rng rng(201);
  PointCloud c = oracle::random_cloud(rng, 10);
  EncoderConfig cfg;  // defaults
  const StagePointSet s = raw_point_embed(c, cfg);
  CHECK(s.coords == c.points);
  CHECK(s.feats.rows == 10);
  CHECK(s.feats.cols == 72);

  const PosEParams params{cfg.init_dim, cfg.alpha, cfg.beta};
  for (std::size_t i = 0; i < 10; ++i) {
    const auto want = pos_e(c.points[i], params);
    for (std::size_t j = 0; j < 72; ++j) CHECK(s.feats.at(i, j) == want[j]);
  }

  PointCloud origin{{{0, 0, 0}}};
  const StagePointSet so = raw_point_embed(origin, cfg);
  for (std::size_t j = 0; j < 72; j += 2) {
    CHECK(so.feats.at(0, j) == 0.0);
    CHECK(so.feats.at(0, j + 1) == 1.0);
  }
}

TEST_CASE("expand_features concatenates center and neighbor") {
  Rng rng(202);
  Matrix nbrs = oracle::random_matrix(rng, 5, 4);
  std::vector<double> center{1.0, 2.0, 3.0, 4.0};
  const Matrix out = expand_features(center, nbrs);
  CHECK(out.rows == 5);
  CHECK(out.cols == 8);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(out.at(j, c) == center[c]);
      CHECK(out.at(j, 4 + c) == nbrs.at(j, c));
    }

  // center equal to one neighbor repeats the feature
  Matrix one(1, 4);
  std::copy(center.begin(), center.end(), one.row(0).begin());
  const Matrix rep = expand_features(center, one);
  for (std::size_t c = 0; c < 4; ++c) CHECK(rep.at(0, c) == rep.at(0, 4 + c));

  std::vector<double> bad{1.0, 2.0};
  CHECK_THROWS_AS(expand_features(bad, nbrs), std::invalid_argument);
}

TEST_CASE("weigh_neighbors formula") {
  Rng rng(203);
  const std::size_t k = 4, dim = 12;
  Matrix expanded = oracle::random_matrix(rng, k, dim);
  std::vector<Vec3> delta;
  for (std::size_t j = 0; j < k; ++j)
    delta.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  const PosEParams pose{dim, 50.0, 10.0};
  const Matrix out = weigh_neighbors(expanded, delta, pose);
  for (std::size_t j = 0; j < k; ++j) {
    const auto e = pos_e(delta[j], pose);
    for (std::size_t c = 0; c < dim; ++c)
      CHECK(out.at(j, c) == doctest::Approx((expanded.at(j, c) + e[c]) * e[c]).epsilon(1e-12));
  }

  SUBCASE("zero offset forces even channels to 0 and odd to f+1") {
    std::vector<Vec3> zero(k, Vec3{0, 0, 0});
    const Matrix z = weigh_neighbors(expanded, zero, pose);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t c = 0; c < dim; c += 2) {
        CHECK(z.at(j, c) == 0.0);
        CHECK(z.at(j, c + 1) == expanded.at(j, c + 1) + 1.0);
      }
  }

  SUBCASE("zero features leave e*e in [0,1]") {
    Matrix zf(k, dim);
    const Matrix z = weigh_neighbors(zf, delta, pose);
    for (double v : z.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  SUBCASE("dimension mismatches throw") {
    CHECK_THROWS_AS(weigh_neighbors(expanded, delta, PosEParams{2 * dim, 50.0, 10.0}),
                    std::invalid_argument);
    std::vector<Vec3> short_delta(k - 1, Vec3{0, 0, 0});
    CHECK_THROWS_AS(weigh_neighbors(expanded, short_delta, pose), std::invalid_argument);
  }
}

TEST_CASE("pool_neighborhood modes") {
  Rng rng(204);
  Matrix m = oracle::random_matrix(rng, 5, 8);
  const auto maxed = pool_neighborhood(m, StagePooling::Max);
  const auto averaged = pool_neighborhood(m, StagePooling::Avg);
  const auto both = pool_neighborhood(m, StagePooling::MaxPlusAvg);
  const auto want_max = oracle::pool_max(m);
  const auto want_avg = oracle::pool_avg(m);
  for (std::size_t c = 0; c < 8; ++c) {
    CHECK(maxed[c] == want_max[c]);
    CHECK(averaged[c] == doctest::Approx(want_avg[c]).epsilon(1e-12));
    CHECK(both[c] == doctest::Approx(want_max[c] + want_avg[c]).epsilon(1e-12));
  }

  // constant rows pool to twice the row under max+avg
  Matrix constant(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 4; ++c) constant.at(i, c) = 0.5 * static_cast<double>(c);
  const auto doubled = pool_neighborhood(constant, StagePooling::MaxPlusAvg);
  for (std::size_t c = 0; c < 4; ++c) CHECK(doubled[c] == doctest::Approx(c).epsilon(1e-12));

  // single row pools to twice itself
  Matrix single = oracle::random_matrix(rng, 1, 4);
  const auto twice = pool_neighborhood(single, StagePooling::MaxPlusAvg);
  for (std::size_t c = 0; c < 4; ++c)
    CHECK(twice[c] == doctest::Approx(2.0 * single.at(0, c)).epsilon(1e-12));

  CHECK_THROWS_AS(pool_neighborhood(Matrix{}, StagePooling::Max), std::invalid_argument);
}

TEST_CASE("encode_stage halves points and doubles the feature dim") {
  Rng rng(205);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = oracle::random_cloud(rng, 21);
  StagePointSet s = raw_point_embed(c, cfg);
  const StagePointSet out = encode_stage(s, cfg, 1);
  CHECK(out.size() == 11);  // ceil(21/2)
  CHECK(out.feats.cols == 24);
  CHECK(out.feats.all_finite());
}

TEST_CASE("encode_stage equals the composed public operations") {
  Rng rng(206);
  const EncoderConfig cfg = tiny_config();
  PointCloud cloud = oracle::random_cloud(rng, 18);
  const StagePointSet input = raw_point_embed(cloud, cfg);
  const StagePointSet fused = encode_stage(input, cfg, 1);

  // rebuild stage 1 from farthest_point_sample/knn/expand/weigh/pool
  const std::size_t m_out = (input.size() + 1) / 2;
  const std::size_t k = std::min(cfg.neighbors, input.size());
  PointCloud in_cloud{input.coords};
  const auto centers = farthest_point_sample(in_cloud, m_out);
  PointCloud center_cloud;
  for (auto ci : centers) center_cloud.points.push_back(input.coords[ci]);
  const NeighborIndex nbrs = knn(center_cloud, in_cloud, k);
  const PosEParams pose = cfg.stage_pose(1);

  for (std::size_t ci = 0; ci < m_out; ++ci) {
    std::vector<Vec3> nbr_coords;
    Matrix nbr_feats(k, input.feats.cols);
    for (std::size_t j = 0; j < k; ++j) {
      nbr_coords.push_back(input.coords[nbrs.row(ci)[j]]);
      auto src = input.feats.row(nbrs.row(ci)[j]);
      std::copy(src.begin(), src.end(), nbr_feats.row(j).begin());
    }
    const auto delta = normalize_neighborhood(input.coords[centers[ci]], nbr_coords);
    const Matrix expanded = expand_features(input.feats.row(centers[ci]), nbr_feats);
    const Matrix weighted = weigh_neighbors(expanded, delta, pose);
    const auto pooled = pool_neighborhood(weighted, cfg.stage_pooling);
    CHECK(linf(fused.feats.row(ci), pooled) == 0.0);
    CHECK(fused.coords[ci] == input.coords[centers[ci]]);
  }
}

TEST_CASE("encode_stage clamps k on tiny clouds") {
  const EncoderConfig cfg = tiny_config();  // neighbors = 6
  PointCloud c{{{0, 0, 0}, {1, 0, 0}}};
  StagePointSet s = raw_point_embed(c, cfg);
  std::vector<std::string> warnings;
  const StagePointSet out = encode_stage(s, cfg, 1, &warnings);
  CHECK(out.size() == 1);
  CHECK(out.feats.cols == 24);
  CHECK(warnings.size() == 1);
}

TEST_CASE("encode_stage output set is permutation invariant") {
  Rng rng(207);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = oracle::random_cloud(rng, 16);
  StagePointSet a = raw_point_embed(c, cfg);

  std::vector<std::uint32_t> perm(16);
  std::iota(perm.begin(), perm.end(), 0u);
  rng.shuffle(perm);
  PointCloud shuffled;
  for (auto p : perm) shuffled.points.push_back(c.points[p]);
  StagePointSet b = raw_point_embed(shuffled, cfg);

  const StagePointSet oa = encode_stage(a, cfg, 1);
  const StagePointSet ob = encode_stage(b, cfg, 1);

  // compare as sets of (coord, feature) rows sorted by coordinates
  auto order_of = [](const StagePointSet& s) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return s.coords[x] < s.coords[y]; });
    return idx;
  };
  const auto ia = order_of(oa);
  const auto ib = order_of(ob);
  REQUIRE(oa.size() == ob.size());
  for (std::size_t r = 0; r < oa.size(); ++r) {
    CHECK(oa.coords[ia[r]] == ob.coords[ib[r]]);
    CHECK(linf(oa.feats.row(ia[r]), ob.feats.row(ib[r])) < 1e-5);
  }
}

TEST_CASE("encode_global under defaults produces 1152 dims on 1024 points") {
  Rng rng(208);
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 1024));
  EncoderConfig cfg;  // 4 stages, init 72, k 90
  CHECK(cfg.global_dim() == 1152);
  const GlobalFeature g = encode_global(c, cfg);
  CHECK(g.size() == 1152);
  for (double v : g.values) CHECK(std::isfinite(v));
}

TEST_CASE("shape law across stages") {
  Rng rng(209);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 40));
  const auto levels = encode_stages(c, cfg);
  REQUIRE(levels.size() == cfg.stages + 1);
  std::size_t expect_n = 40;
  for (std::size_t s = 1; s <= cfg.stages; ++s) {
    expect_n = (expect_n + 1) / 2;
    CHECK(levels[s].size() == expect_n);
    CHECK(levels[s].feats.cols == cfg.init_dim << s);
  }
}

TEST_CASE("encode_global ignores input point order") {
  Rng rng(210);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 64));
  const GlobalFeature base = encode_global(c, cfg);
  for (int iter = 0; iter < 5; ++iter) {
    PointCloud shuffled = c;
    rng.shuffle(shuffled.points);
    const GlobalFeature g = encode_global(shuffled, cfg);
    CHECK(linf(base.values, g.values) < 1e-5);
  }
}

TEST_CASE("encode_global is deterministic") {
  Rng rng(211);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 50));
  const GlobalFeature a = encode_global(c, cfg);
  const GlobalFeature b = encode_global(c, cfg);
  CHECK(a.values == b.values);
}

TEST_CASE("rotation and scaling change the encoding") {
  Rng rng(212);
  const EncoderConfig cfg = tiny_config();
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 48));

  PointCloud rotated;
  const double angle = 1.234;
  for (const Vec3& p : c.points)
    rotated.points.push_back({std::cos(angle) * p[0] - std::sin(angle) * p[1],
                              std::sin(angle) * p[0] + std::cos(angle) * p[1], p[2]});
  const GlobalFeature base = encode_global(c, cfg);
  const GlobalFeature rot = encode_global(rotated, cfg);
  CHECK(linf(base.values, rot.values) > 1e-6);

  PointCloud scaled;
  for (const Vec3& p : c.points) scaled.points.push_back(p * 0.5);
  const GlobalFeature sc = encode_global(scaled, cfg);
  CHECK(linf(base.values, sc.values) > 1e-6);
}

TEST_CASE("config variants change dimensions as documented") {
  EncoderConfig cfg = tiny_config();
  cfg.global_pooling = GlobalPooling::ConcatMaxAvg;
  CHECK(cfg.global_dim() == 2 * (cfg.init_dim << cfg.stages));

  EncoderConfig flat = tiny_config();
  flat.feature_expansion = false;
  CHECK(flat.global_dim() == flat.init_dim);

  Rng rng(213);
  PointCloud c = normalize_cloud(oracle::random_cloud(rng, 32));
  CHECK(encode_global(c, cfg).size() == cfg.global_dim());
  CHECK(encode_global(c, flat).size() == flat.global_dim());

  EncoderConfig ball = tiny_config();
  ball.grouping = Grouping::BallQuery;
  ball.ball_radius = 2.5;  // normalized clouds fit in the unit sphere
  CHECK(encode_global(c, ball).size() == ball.global_dim());
}

TEST_CASE("tiny clouds never crash") {
  EncoderConfig cfg = tiny_config();
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{5}}) {
    Rng rng(300 + n);
    PointCloud c = oracle::random_cloud(rng, n);
    const GlobalFeature g = encode_global(c, cfg);
    CHECK(g.size() == cfg.global_dim());
  }
}

TEST_CASE("classification defaults") {
  const EncoderConfig cfg;
  CHECK(cfg.stages == 4);
  CHECK(cfg.init_dim == 72);
  CHECK(cfg.neighbors == 90);
  CHECK(cfg.alpha == 1000.0);
  CHECK(cfg.beta == 100.0);
  CHECK(cfg.stage_pooling == StagePooling::MaxPlusAvg);
  CHECK(cfg.grouping == Grouping::kNN);
  CHECK(cfg.global_dim() == 1152);
}

TEST_CASE("config validation") {
  EncoderConfig cfg;
  cfg.init_dim = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = EncoderConfig{};
  cfg.stages = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = EncoderConfig{};
  cfg.stage_alpha = {1.0};  // shorter than stages
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_SUITE_END();
