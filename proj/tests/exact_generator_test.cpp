#include <gtest/gtest.h>

#include <cmath>

#include "bdex/dynamics.hpp"
#include "bdex/errors.hpp"
#include "bdex/thermo.hpp"

using namespace bdex;

namespace {

// Dense generator written out from the rate definitions, d = 1 only:
// nearest-neighbor jumps at rate 1/2 + (1 ± v)/(2N), ordered collision
// quadruples at rate 1, reservoir flips at the two end sites.
Eigen::MatrixXd dense_oracle(int N, const std::vector<double>& v, const std::vector<double>& alpha,
                             const std::vector<double>& beta, bool periodic, DynamicsOptions o) {
  const int sites = N - 1;
  const int nv = static_cast<int>(v.size());
  const int bits = sites * nv;
  const int states = 1 << bits;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(states, states);
  auto occ = [&](int s, int x, int k) { return (s >> (x * nv + k)) & 1; };
  auto flip = [&](int s, int x, int k) { return s ^ (1 << (x * nv + k)); };
  for (int s = 0; s < states; ++s) {
    auto add = [&](int t, double r) {
      if (r == 0.0 || t == s) return;
      L(s, t) += r;
      L(s, s) -= r;
    };
    for (int x = 0; x < sites; ++x) {
      for (int k = 0; k < nv; ++k) {
        if (o.exclusion && occ(s, x, k)) {
          for (int dir : {+1, -1}) {
            int y = x + dir;
            if (periodic) y = (y + sites) % sites;
            if (y < 0 || y >= sites || y == x) continue;
            if (occ(s, y, k)) continue;
            const double a = 1.0;  // |v| + (1 - |v|) in d = 1
            const double p = 0.5 * (a + dir * v[k]);
            add(flip(flip(s, x, k), y, k), 0.5 + p / N);
          }
        }
        if (o.boundary && !periodic) {
          if (x == 0) add(flip(s, x, k), occ(s, x, k) ? 1 - alpha[k] : alpha[k]);
          if (x == sites - 1) add(flip(s, x, k), occ(s, x, k) ? 1 - beta[k] : beta[k]);
        }
      }
      if (o.collisions)
        for (int a = 0; a < nv; ++a)
          for (int b = 0; b < nv; ++b)
            for (int c = 0; c < nv; ++c)
              for (int d = 0; d < nv; ++d) {
                if (a == b || c == d) continue;
                if (std::abs(v[a] + v[b] - v[c] - v[d]) > 1e-12) continue;
                if (!(occ(s, x, a) && occ(s, x, b) && !occ(s, x, c) && !occ(s, x, d))) continue;
                add(flip(flip(flip(flip(s, x, a), x, b), x, c), x, d), 1.0);
              }
    }
  }
  return double(N) * N * L;
}

void expect_matches(const ExactGenerator& gen, const Eigen::MatrixXd& oracle) {
  ASSERT_EQ(gen.state_count(), static_cast<std::size_t>(oracle.rows()));
  for (Eigen::Index i = 0; i < oracle.rows(); ++i)
    for (Eigen::Index j = 0; j < oracle.cols(); ++j)
      ASSERT_NEAR(gen.entry(i, j), oracle(i, j), 1e-12 * (1 + std::abs(oracle(i, j)))) << i << ',' << j;
}

}  // namespace

TEST(ExactGenerator, MatchesDenseOracleTwoVelocities) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const std::vector<double> a{0.3, 0.4}, b{0.6, 0.5};
  for (int N : {2, 3, 4}) {
    const Model m(Lattice(N, 1), vs, ReservoirProfiles::constant(a, b));
    expect_matches(assemble_exact_generator(m), dense_oracle(N, {0.5, -0.5}, a, b, false, {}));
  }
}

TEST(ExactGenerator, MatchesDenseOracleFourVelocities) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const std::vector<double> a{0.3, 0.4, 0.2, 0.7}, b{0.6, 0.5, 0.1, 0.9};
  const Model m(Lattice(3, 1), vs, ReservoirProfiles::constant(a, b));
  expect_matches(assemble_exact_generator(m), dense_oracle(3, {0.5, -0.5, 0.25, -0.25}, a, b, false, {}));
}

TEST(ExactGenerator, MatchesDenseOraclePeriodic) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const std::vector<double> a(4, 0.5);
  const Model m(Lattice(4, 1, Wall::Periodic), vs, ReservoirProfiles::constant(a, a), {true, true, false});
  expect_matches(assemble_exact_generator(m),
                 dense_oracle(4, {0.5, -0.5, 0.25, -0.25}, a, a, true, {true, true, false}));
}

TEST(ExactGenerator, RowsSumToZero) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const Model m(Lattice(3, 1), vs, ReservoirProfiles::constant({0.3, 0.4, 0.2, 0.7}, {0.6, 0.5, 0.1, 0.9}));
  EXPECT_EQ(assemble_exact_generator(m).row_sum_residual(), 0.0);
}

TEST(ExactGenerator, EncodeDecodeRoundTrip) {
  for (std::size_t s = 0; s < 256; ++s)
    EXPECT_EQ(ExactGenerator::encode(ExactGenerator::decode(s, 2, 4)), s);
}

TEST(ExactGenerator, CapIsEnforced) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const Model m(Lattice(7, 1), vs, ReservoirProfiles::constant({.5, .5, .5, .5}, {.5, .5, .5, .5}));
  EXPECT_THROW(assemble_exact_generator(m), SizeError);
}

TEST(ProductMeasure, WeightsAreBernoulliProducts) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Model m(Lattice(3, 1, Wall::Periodic), vs, ReservoirProfiles::constant({.5, .5}, {.5, .5}));
  StateVec l(2);
  l << 0.3, -1.1;
  const auto mu = product_measure_weights(m, {l});
  const double tp = 1 / (1 + std::exp(-(0.3 - 0.55))), tm = 1 / (1 + std::exp(-(0.3 + 0.55)));
  double total = 0;
  for (std::size_t s = 0; s < mu.size(); ++s) {
    double w = 1;
    for (int x = 0; x < 2; ++x) {
      w *= ((s >> (2 * x)) & 1) ? tp : 1 - tp;
      w *= ((s >> (2 * x + 1)) & 1) ? tm : 1 - tm;
    }
    EXPECT_NEAR(mu[s], w, 1e-15);
    total += mu[s];
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(ProductMeasure, InvariantUnderPeriodicExclusionAndCollisions) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const Model m(Lattice(4, 1, Wall::Periodic), vs, ReservoirProfiles::constant({.5, .5, .5, .5}, {.5, .5, .5, .5}),
                {true, true, false});
  const auto gen = assemble_exact_generator(m);
  StateVec l(2);
  l << -0.4, 1.7;
  const auto r = gen.left_apply(product_measure_weights(m, {l}));
  for (double x : r) EXPECT_LE(std::abs(x), 1e-12);
}

TEST(ProductMeasure, NotInvariantWithUnmatchedReservoirs) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Model m(Lattice(3, 1), vs, ReservoirProfiles::constant({0.3, 0.4}, {0.6, 0.5}));
  const auto gen = assemble_exact_generator(m);
  StateVec l(2);
  l << 0.0, 0.0;
  double worst = 0;
  for (double x : gen.left_apply(product_measure_weights(m, {l}))) worst = std::max(worst, std::abs(x));
  EXPECT_GT(worst, 1e-3);
}

TEST(DetailedBalance, CollisionsBalanceAgainstProductMeasure) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const Model m(Lattice(3, 1), vs, ReservoirProfiles::constant({.5, .5, .5, .5}, {.5, .5, .5, .5}),
                {false, true, false});
  const auto gen = assemble_exact_generator(m);
  StateVec l(2);
  l << 0.2, 0.9;
  const auto report = detailed_balance(gen, product_measure_weights(m, {l}));
  EXPECT_GT(report.transitions, 0u);
  EXPECT_LE(report.max_violation, 1e-15);
}
