#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pmnet/common/random.hpp"
#include "pmnet/geo/building_map.hpp"
#include "pmnet/geo/map_generator.hpp"

using namespace pmnet;
using namespace pmnet::geo;

namespace {

BuildingMap random_map(int size, double p, std::uint64_t seed) {
  BuildingMap m(size, 1.0, "rand");
  Rng rng(seed);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (rng.uniform01() < p) m.set(x, y, Cell::Building);
  return m;
}

MapGenParams params(std::uint64_t seed, int size, double density) {
  MapGenParams p;
  p.seed = seed;
  p.size = size;
  p.density = density;
  return p;
}

}  // namespace

TEST(GenerateMap, ZeroDensityIsAllFree) {
  const auto m = generate_map(params(7, 64, 0.0));
  EXPECT_EQ(m.count(Cell::Free), 64u * 64u);
}

TEST(GenerateMap, SameSeedSameMap) {
  EXPECT_EQ(generate_map(params(7, 64, 0.3)), generate_map(params(7, 64, 0.3)));
  EXPECT_NE(generate_map(params(7, 64, 0.3)), generate_map(params(8, 64, 0.3)));
}

TEST(GenerateMap, DensityNearTarget) {
  const auto m = generate_map(params(7, 64, 0.3));
  const double frac = static_cast<double>(m.count(Cell::Building)) / (64.0 * 64.0);
  EXPECT_GE(frac, 0.15);
  EXPECT_LE(frac, 0.45);
}

TEST(GenerateMap, FoliageOnlyWhenRequested) {
  EXPECT_EQ(generate_map(params(3, 64, 0.3)).count(Cell::Foliage), 0u);
  auto p = params(3, 64, 0.3);
  p.foliage_fraction = 0.1;
  EXPECT_GT(generate_map(p).count(Cell::Foliage), 0u);
}

TEST(GenerateMap, RejectsBadParameters) {
  EXPECT_THROW(generate_map(params(1, 16, 0.3)), std::invalid_argument);
  EXPECT_THROW(generate_map(params(1, 64, 1.0)), std::invalid_argument);
  EXPECT_THROW(generate_map(params(1, 64, -0.1)), std::invalid_argument);
}

TEST(GenerateMap, DenseTargetStillLeavesFreeCells) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto m = generate_map(params(s, 64, 0.9));
    EXPECT_GT(m.count(Cell::Free), 0u);
    EXPECT_NO_THROW(m.validate());
  }
}

TEST(BuildingMapTest, ValidateRejectsNoFreeCell) {
  BuildingMap m(4, 1.0);
  m.fill_rect(0, 0, 4, 4, Cell::Building);
  EXPECT_THROW(m.validate(), std::invalid_argument);
  EXPECT_THROW(BuildingMap(4, 0.0), std::invalid_argument);
}

TEST(LineOfSight, EmptyMapDiagonal) {
  BuildingMap m(5, 1.0);
  EXPECT_TRUE(line_of_sight(m, {0, 0}, {4, 4}));
}

TEST(LineOfSight, BuildingOnDiagonalBlocks) {
  BuildingMap m(5, 1.0);
  m.set(2, 2, Cell::Building);
  EXPECT_FALSE(line_of_sight(m, {0, 0}, {4, 4}));
}

TEST(LineOfSight, SamePixel) {
  BuildingMap m(5, 1.0);
  EXPECT_TRUE(line_of_sight(m, {3, 1}, {3, 1}));
}

TEST(LineOfSight, EndpointsAreNotTested) {
  BuildingMap m(5, 1.0);
  m.set(4, 4, Cell::Building);
  m.set(0, 0, Cell::Building);
  EXPECT_TRUE(line_of_sight(m, {0, 0}, {4, 4}));
}

TEST(LineOfSight, FoliageDoesNotBlock) {
  BuildingMap m(5, 1.0);
  m.fill_rect(0, 2, 5, 3, Cell::Foliage);
  EXPECT_TRUE(line_of_sight(m, {2, 0}, {2, 4}));
}

TEST(LineOfSight, CornerPassageCountsAllFourCells) {
  // the 0,0 -> 2,2 diagonal passes exactly through the corners of (1,0) and (0,1)
  BuildingMap m(3, 1.0);
  m.set(1, 0, Cell::Building);
  EXPECT_FALSE(line_of_sight(m, {0, 0}, {2, 2}));
}

TEST(LineOfSight, SymmetricOnRandomMaps) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto m = random_map(8, 0.2, seed);
    for (int a = 0; a < 64; ++a)
      for (int b = a + 1; b < 64; ++b) {
        const Pixel p{a % 8, a / 8}, q{b % 8, b / 8};
        ASSERT_EQ(line_of_sight(m, p, q), line_of_sight(m, q, p)) << p.x << "," << p.y << " " << q.x << "," << q.y;
      }
  }
}

TEST(LineOfSight, MatchesDenseSamplingOracle) {
  Rng rng(42);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_map(16, 0.15, seed + 100);
    for (int t = 0; t < 200; ++t) {
      const Pixel p{static_cast<int>(rng.uniform_int(0, 15)), static_cast<int>(rng.uniform_int(0, 15))};
      const Pixel q{static_cast<int>(rng.uniform_int(0, 15)), static_cast<int>(rng.uniform_int(0, 15))};
      bool oracle = true;
      for (const auto& [x, y] : pmnet::testing::dense_cells(p.x, p.y, q.x, q.y)) {
        if ((x == p.x && y == p.y) || (x == q.x && y == q.y)) continue;
        if (x >= 0 && y >= 0 && x < 16 && y < 16 && m.at(x, y) == Cell::Building) oracle = false;
      }
      ASSERT_EQ(line_of_sight(m, p, q), oracle) << p.x << "," << p.y << " -> " << q.x << "," << q.y;
    }
  }
}

TEST(Supercover, ContainsEndpointsAndIsConnected) {
  const auto cells = supercover({1, 2}, {9, 5});
  EXPECT_EQ(cells.front(), (Pixel{1, 2}));
  EXPECT_EQ(cells.back(), (Pixel{9, 5}));
  for (std::size_t i = 1; i < cells.size(); ++i) {
    EXPECT_LE(std::abs(cells[i].x - cells[i - 1].x), 1);
    EXPECT_LE(std::abs(cells[i].y - cells[i - 1].y), 1);
  }
}

TEST(LinkGeometryTest, HandCalculation) {
  BuildingMap m(8, 1.0);
  const auto g = link_geometry(m, {{0, 0}, 10.0}, {3, 4}, 1.5);
  EXPECT_DOUBLE_EQ(g.d_2d, 5.0);
  EXPECT_NEAR(g.d_3d, std::sqrt(25.0 + 72.25), 1e-12);
  EXPECT_NEAR(g.d_3d, 9.862, 5e-4);
  EXPECT_TRUE(g.los);
}

TEST(LinkGeometryTest, VerticalLink) {
  BuildingMap m(8, 1.0);
  const auto g = link_geometry(m, {{2, 2}, 10.0}, {2, 2}, 1.5);
  EXPECT_EQ(g.d_2d, 0.0);
  EXPECT_DOUBLE_EQ(g.d_3d, 8.5);
}

TEST(LinkGeometryTest, ScaleIsLinear) {
  BuildingMap full(8, 1.0), half(8, 0.5);
  const auto a = link_geometry(full, {{0, 0}, 10.0}, {3, 4}, 1.5);
  const auto b = link_geometry(half, {{0, 0}, 10.0}, {3, 4}, 1.5);
  EXPECT_DOUBLE_EQ(b.d_2d, a.d_2d / 2.0);
  EXPECT_NEAR(b.d_3d * b.d_3d, b.d_2d * b.d_2d + 8.5 * 8.5, 1e-12);
}

TEST(PlaceTx, LandsOnFreeCellDeterministically) {
  const auto m = generate_map(params(5, 64, 0.4));
  const auto a = place_tx(m, 9, 4);
  EXPECT_TRUE(m.is_free(a.pos));
  EXPECT_EQ(a.pos, place_tx(m, 9, 4).pos);
}

TEST(MapIo, PngRoundTripWithSidecar) {
  pmnet::testing::TempDir dir;
  auto p = params(5, 64, 0.3);
  p.foliage_fraction = 0.05;
  auto m = generate_map(p);
  m.set_map_id("m1");
  write_map(dir / "m.png", m, &p);
  EXPECT_EQ(read_map(dir / "m.png"), m);
  EXPECT_EQ(cell_to_gray(Cell::Free), 255);
  EXPECT_EQ(cell_to_gray(Cell::Building), 0);
  EXPECT_EQ(cell_to_gray(Cell::Foliage), 128);
}
