#include <doctest.h>

#include "soar/core/common.hpp"
#include "soar/core/grid_knn.hpp"
#include "soar/core/image.hpp"
#include "soar/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace soar;

TEST_CASE("rng streams are reproducible and state round-trips") {
  Rng a(42), b(42);
  for (int i = 0; i < 200; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(7);
  for (int i = 0; i < 37; ++i) c.normal();  // leave a cached Box-Muller value
  const std::string state = c.save_state();
  std::vector<double> expect;
  for (int i = 0; i < 50; ++i) expect.push_back(c.normal());
  Rng d(999);
  d.load_state(state);
  for (int i = 0; i < 50; ++i) CHECK(d.normal() == expect[i]);
}

TEST_CASE("rng uniform stays in range and derived seeds separate streams") {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_index(7);
    CHECK(v < 7);
  }
  CHECK(Rng::derive_seed(5, "reconstruct") != Rng::derive_seed(5, "sds"));
  CHECK(Rng::derive_seed(5, "reconstruct") == Rng::derive_seed(5, "reconstruct"));
  CHECK(Rng::derive_seed(5, "reconstruct") != Rng::derive_seed(6, "reconstruct"));
}

TEST_CASE("rng normal moments are sane") {
  Rng r(3);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("parallel_for covers the range exactly once") {
  const std::int64_t n = 1013;
  std::vector<int> hits(n, 0);
  parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) hits[i]++;
  });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  parallel_for(0, [&](std::int64_t, std::int64_t) { CHECK(false); });
}

TEST_CASE("downsample2 averages 2x2 blocks and drops trailing odd edges") {
  Image img(5, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) img.at(x, y) = y * 5 + x;
  const Image half = downsample2(img);
  CHECK(half.width() == 2);
  CHECK(half.height() == 2);
  CHECK(half.at(0, 0) == doctest::Approx((0 + 1 + 5 + 6) / 4.0));
  CHECK(half.at(1, 1) == doctest::Approx((12 + 13 + 17 + 18) / 4.0));
}

TEST_CASE("dilate matches a brute-force Chebyshev dilation") {
  Rng rng(5);
  Image mask(17, 13, 1);
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 17; ++x) mask.at(x, y) = rng.uniform() < 0.2 ? 1.0 : 0.0;
  for (int radius : {0, 1, 3}) {
    const Image fast = dilate(mask, radius);
    for (int y = 0; y < 13; ++y) {
      for (int x = 0; x < 17; ++x) {
        double best = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx < 0 || yy < 0 || xx >= 17 || yy >= 13) continue;
            best = std::max(best, mask.at(xx, yy));
          }
        }
        CHECK(fast.at(x, y) == best);
      }
    }
  }
}

TEST_CASE("knn grid matches the exhaustive oracle on random clouds") {
  Rng rng(11);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i)
    pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  // A tight cluster stresses the ring-termination bound.
  for (int i = 0; i < 50; ++i)
    pts.emplace_back(0.5 + 1e-4 * rng.normal(), 0.5 + 1e-4 * rng.normal(),
                     0.5 + 1e-4 * rng.normal());

  const KnnGrid grid(pts);
  auto oracle = [&](const Vec3& q, int k, int exclude) {
    std::vector<std::pair<double, int>> all;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (i == exclude) continue;
      all.emplace_back((pts[i] - q).squaredNorm(), i);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> out;
    for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i)
      out.push_back(all[i].second);
    return out;
  };

  for (int trial = 0; trial < 200; ++trial) {
    const int i = static_cast<int>(rng.uniform_index(pts.size()));
    for (int k : {1, 3, 30}) {
      CHECK(grid.nearest(pts[i], k, i) == oracle(pts[i], k, i));
    }
  }
  // Off-set queries, including ones outside the bounding box.
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 q(rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5));
    CHECK(grid.nearest(q, 5) == oracle(q, 5, -1));
  }
}

TEST_CASE("knn grid handles degenerate layouts") {
  std::vector<Vec3> line;
  for (int i = 0; i < 4; ++i) line.emplace_back(i, 0.0, 0.0);
  const KnnGrid grid(line);
  CHECK(grid.nearest(line[0], 3, 0) == std::vector<int>{1, 2, 3});

  std::vector<Vec3> dup(6, Vec3(1, 2, 3));
  const KnnGrid dgrid(dup);
  const auto nn = dgrid.nearest(dup[2], 3, 2);
  CHECK(nn == std::vector<int>{0, 1, 3});  // ties break by index

  CHECK(grid.nearest(line[0], 10, 0).size() == 3);  // runs out of points
}
