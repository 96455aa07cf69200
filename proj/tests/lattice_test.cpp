#include <gtest/gtest.h>

#include <sstream>

#include "bdex/errors.hpp"
#include "bdex/lattice.hpp"
#include "bdex/rng.hpp"

using namespace bdex;

TEST(Lattice, SiteCoordinateRoundTrip) {
  const Lattice lat(6, 3);
  EXPECT_EQ(lat.site_count(), 5u * 6 * 6);
  for (Site x = 0; x < lat.site_count(); ++x) {
    const auto c = lat.coords(x);
    EXPECT_GE(c[0], 1);
    EXPECT_LE(c[0], 5);
    EXPECT_EQ(lat.site(c), x);
  }
}

TEST(Lattice, ReservoirWallBlocksFirstCoordinate) {
  const Lattice lat(5, 2);
  const Site left = lat.site({1, 0, 0});
  const int minus_e1[] = {-1, 0};
  const int minus_e2[] = {0, -1};
  EXPECT_FALSE(lat.displace(left, minus_e1).has_value());
  // Transverse directions wrap.
  EXPECT_EQ(*lat.displace(left, minus_e2), lat.site({1, 4, 0}));
  EXPECT_TRUE(lat.is_left(left));
  EXPECT_FALSE(lat.is_right(left));
  EXPECT_TRUE(lat.is_right(lat.site({4, 2, 0})));
  EXPECT_EQ(lat.classify(lat.site({2, 2, 0})), BoundarySide::Bulk);
}

TEST(Lattice, PeriodicWallWraps) {
  const Lattice lat(5, 1, Wall::Periodic);
  const int step[] = {1};
  EXPECT_EQ(*lat.displace(lat.site({4, 0, 0}), step), lat.site({1, 0, 0}));
  EXPECT_FALSE(lat.is_left(0));
}

TEST(Lattice, SingleSiteTouchesBothWalls) {
  const Lattice lat(2, 1);
  ASSERT_EQ(lat.site_count(), 1u);
  EXPECT_TRUE(lat.is_left(0));
  EXPECT_TRUE(lat.is_right(0));
}

TEST(Lattice, NeighborsStayInside) {
  const Lattice lat(4, 2);
  for (Site x = 0; x < lat.site_count(); ++x)
    for (const auto& nb : lat.neighbors(x)) EXPECT_TRUE(lat.valid(nb.site));
  EXPECT_EQ(lat.neighbors(lat.site({1, 0, 0})).size(), 3u);
  EXPECT_EQ(lat.neighbors(lat.site({2, 0, 0})).size(), 4u);
}

TEST(Configuration, CheckpointRoundTrip) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const Lattice lat(37, 1);
  Configuration eta(lat.site_count(), vs.size());
  Philox g(2);
  for (Site x = 0; x < lat.site_count(); ++x)
    for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, g.bernoulli(0.4));
  std::stringstream buf;
  write_checkpoint(buf, eta, lat);
  EXPECT_EQ(read_checkpoint(buf, lat, vs), eta);
}

TEST(Configuration, CheckpointRejectsOtherLattice) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Lattice lat(8, 1);
  std::stringstream buf;
  write_checkpoint(buf, Configuration(lat.site_count(), vs.size()), lat);
  EXPECT_ANY_THROW(read_checkpoint(buf, Lattice(9, 1), vs));
}

TEST(Configuration, TotalsSumLiftedVelocities) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Lattice lat(5, 1);
  Configuration eta(lat.site_count(), vs.size());
  eta.set(0, 0, true);
  eta.set(1, 0, true);
  eta.set(3, 1, true);
  const auto t = totals(eta, lat, vs);
  EXPECT_EQ(t.rho(), 3.0);
  EXPECT_EQ(t.p(1), 0.5);
  EXPECT_EQ(eta.count(0), 2u);
}
