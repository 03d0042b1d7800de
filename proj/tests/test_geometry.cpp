#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "pointnp/geometry.hpp"
#include "pointnp/rng.hpp"

using namespace pointnp;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("fps single point") {
  PointCloud c{{{1.0, 2.0, 3.0}}};
  CHECK(farthest_point_sample(c, 1) == std::vector<std::uint32_t>{0});
}

TEST_CASE("fps picks the far point first, then max-min") {
  PointCloud c{{{0, 0, 0}, {1, 0, 0}, {10, 0, 0}}};
  // centroid (11/3, 0, 0): index 2 is farthest; index 0 then maximizes the
  // min distance to {2}
  CHECK(farthest_point_sample(c, 2) == std::vector<std::uint32_t>{2, 0});
}

TEST_CASE("fps with m == N is a permutation") {
  Rng rng(7);
  PointCloud c = oracle::random_cloud(rng, 17);
  auto sel = farthest_point_sample(c, 17);
  std::set<std::uint32_t> unique(sel.begin(), sel.end());
  CHECK(unique.size() == 17);
  CHECK(*unique.begin() == 0);
  CHECK(*unique.rbegin() == 16);
}

TEST_CASE("fps argument validation") {
  PointCloud c{{{0, 0, 0}, {1, 1, 1}}};
  CHECK_THROWS_AS(farthest_point_sample(c, 0), std::invalid_argument);
  CHECK_THROWS_AS(farthest_point_sample(c, 3), std::invalid_argument);
  PointCloud bad{{{0, 0, std::numeric_limits<double>::quiet_NaN()}}};
  CHECK_THROWS_AS(farthest_point_sample(bad, 1), std::invalid_argument);
}

TEST_CASE("fps matches the brute-force oracle") {
  Rng rng(11);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.uniform_int(64);
    const std::size_t m = 1 + rng.uniform_int(n);
    PointCloud c = oracle::random_cloud(rng, n);
    CHECK(farthest_point_sample(c, m) == oracle::fps(c.points, m));
  }
}

TEST_CASE("fps selected coordinates are permutation invariant") {
  Rng rng(13);
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t n = 4 + rng.uniform_int(40);
    const std::size_t m = 1 + rng.uniform_int(n);
    PointCloud c = oracle::random_cloud(rng, n);

    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    rng.shuffle(perm);
    PointCloud shuffled;
    for (std::uint32_t p : perm) shuffled.points.push_back(c.points[p]);

    auto sel_a = farthest_point_sample(c, m);
    auto sel_b = farthest_point_sample(shuffled, m);
    std::vector<Vec3> coords_a, coords_b;
    for (auto i : sel_a) coords_a.push_back(c.points[i]);
    for (auto i : sel_b) coords_b.push_back(shuffled.points[i]);
    CHECK(coords_a == coords_b);  // same coordinates in the same greedy order
  }
}

TEST_CASE("knn trivial and tie-break cases") {
  PointCloud ref{{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}}};
  PointCloud q{{{0, 0, 0}}};
  auto idx = knn(q, ref, 2);
  CHECK(idx.row(0)[0] == 0);
  CHECK(idx.row(0)[1] == 1);

  // self-query at k=1 returns the own index
  auto self_idx = knn(ref, ref, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(self_idx.row(i)[0] == i);

  // equidistant points at indices 3 and 5: smaller index first
  PointCloud tie_ref{{{9, 9, 9}, {8, 8, 8}, {7, 7, 7}, {1, 0, 0}, {5, 5, 5}, {-1, 0, 0}}};
  auto tie = knn(q, tie_ref, 2);
  CHECK(tie.row(0)[0] == 3);
  CHECK(tie.row(0)[1] == 5);
}

TEST_CASE("knn validates k") {
  PointCloud ref{{{1, 0, 0}, {2, 0, 0}}};
  CHECK_THROWS_AS(knn(ref, ref, 3), std::invalid_argument);
  CHECK_THROWS_AS(knn(ref, ref, 0), std::invalid_argument);
}

TEST_CASE("knn matches the full-sort oracle") {
  Rng rng(17);
  for (int iter = 0; iter < 60; ++iter) {
    const std::size_t nr = 1 + rng.uniform_int(256);
    const std::size_t nq = 1 + rng.uniform_int(32);
    const std::size_t k = 1 + rng.uniform_int(std::min<std::size_t>(nr, 16));
    PointCloud ref = oracle::random_cloud(rng, nr);
    PointCloud q = oracle::random_cloud(rng, nq);
    auto got = knn(q, ref, k);
    auto want = oracle::knn(q.points, ref.points, k);
    for (std::size_t i = 0; i < nq; ++i)
      for (std::size_t j = 0; j < k; ++j) CHECK(got.row(i)[j] == want[i][j]);
  }
}

TEST_CASE("ball query stays in radius and pads short rows") {
  PointCloud ref{{{0, 0, 0}, {0.1, 0, 0}, {5, 0, 0}}};
  PointCloud q{{{0, 0, 0}}};
  auto idx = ball_query(q, ref, 0.5, 3);
  CHECK(idx.row(0)[0] == 0);
  CHECK(idx.row(0)[1] == 1);
  CHECK(idx.row(0)[2] == 0);  // padded with the nearest hit
  PointCloud far_q{{{100, 100, 100}}};
  CHECK_THROWS_AS(ball_query(far_q, ref, 0.5, 2), std::invalid_argument);
}

TEST_CASE("normalize_cloud examples") {
  SUBCASE("fixed point") {
    PointCloud c{{{0, 0, 1}, {0, 0, -1}}};  // centered, max norm 1
    auto out = normalize_cloud(c);
    CHECK(out.points[0] == Vec3{0, 0, 1});
    CHECK(out.points[1] == Vec3{0, 0, -1});
  }
  SUBCASE("single point collapses to origin") {
    PointCloud c{{{5, 5, 5}}};
    auto out = normalize_cloud(c);
    CHECK(out.points[0] == Vec3{0, 0, 0});
  }
  SUBCASE("two points on an axis") {
    PointCloud c{{{0, 0, 0}, {2, 0, 0}}};
    auto out = normalize_cloud(c);
    CHECK(out.points[0][0] == doctest::Approx(-1.0));
    CHECK(out.points[1][0] == doctest::Approx(1.0));
  }
}

TEST_CASE("normalize_cloud invariants on random clouds") {
  Rng rng(23);
  for (int iter = 0; iter < 40; ++iter) {
    const std::size_t n = 2 + rng.uniform_int(100);
    PointCloud c = oracle::random_cloud(rng, n, -4.0, 9.0);
    auto out = normalize_cloud(c);
    const Vec3 centroid = detail::sorted_centroid(out.points);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(centroid[a]) < 1e-6);
    double max_norm = 0.0;
    for (const Vec3& p : out.points) max_norm = std::max(max_norm, norm(p));
    CHECK(max_norm <= 1.0 + 1e-12);
    CHECK(max_norm >= 1.0 - 1e-6);
  }
}

TEST_CASE("normalize_neighborhood examples") {
  SUBCASE("all neighbors equal the center") {
    const Vec3 c{1, 2, 3};
    std::vector<Vec3> nbrs{c, c, c};
    for (const Vec3& d : normalize_neighborhood(c, nbrs)) CHECK(d == Vec3{0, 0, 0});
  }
  SUBCASE("single neighbor offset is absorbed by the mean") {
    const Vec3 c{0, 0, 0};
    std::vector<Vec3> nbrs{{1, 0, 0}};
    CHECK(normalize_neighborhood(c, nbrs)[0] == Vec3{0, 0, 0});
  }
  SUBCASE("two symmetric offsets") {
    const Vec3 c{0, 0, 0};
    std::vector<Vec3> nbrs{{1, 0, 0}, {-1, 0, 0}};
    auto d = normalize_neighborhood(c, nbrs);
    const double sigma = std::sqrt(2.0 / 6.0);
    CHECK(d[0][0] == doctest::Approx(1.0 / (sigma + 1e-5)).epsilon(1e-12));
    CHECK(d[1][0] == doctest::Approx(-1.0 / (sigma + 1e-5)).epsilon(1e-12));
    CHECK(d[0][1] == 0.0);
    CHECK(d[0][2] == 0.0);
  }
}

TEST_CASE("normalize_neighborhood output has zero mean per axis") {
  Rng rng(29);
  for (int iter = 0; iter < 30; ++iter) {
    const std::size_t k = 2 + rng.uniform_int(20);
    const Vec3 center{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    PointCloud nbrs = oracle::random_cloud(rng, k);
    auto d = normalize_neighborhood(center, nbrs.points);
    Vec3 mean{0, 0, 0};
    for (const Vec3& v : d) mean = mean + v;
    for (int a = 0; a < 3; ++a) CHECK(std::abs(mean[a] / static_cast<double>(k)) < 1e-6);
  }
}

TEST_SUITE_END();
