#include <gtest/gtest.h>

#include <cmath>

#include "bdex/errors.hpp"
#include "bdex/rng.hpp"
#include "bdex/thermo.hpp"

using namespace bdex;

namespace {

double logit(double r) { return std::log(r / (1.0 - r)); }

StateVec vec(std::initializer_list<double> xs) {
  StateVec s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) s[i++] = x;
  return s;
}

}  // namespace

TEST(VelocitySet, RejectsAsymmetricSets) {
  EXPECT_THROW(VelocitySet::create(1, {{0.5}, {-0.25}}), ConfigError);
}

TEST(VelocitySet, RejectsDuplicates) {
  EXPECT_THROW(VelocitySet::create(1, {{0.5}, {-0.5}, {0.5}}), ConfigError);
}

TEST(VelocitySet, RejectsSetsThatDoNotSpan) {
  EXPECT_THROW(VelocitySet::create(1, {{0.0}}), ConfigError);
}

TEST(VelocitySet, RejectsSetsNotClosedUnderPermutation) {
  EXPECT_THROW(VelocitySet::create(2, {{0.5, 0.0}, {-0.5, 0.0}, {0.0, 0.25}, {0.0, -0.25}}),
               ConfigError);
}

TEST(VelocitySet, LiftedVectors) {
  const auto vs = VelocitySet::create(2, {{0.5, 0}, {-0.5, 0}, {0, 0.5}, {0, -0.5}});
  for (std::size_t i = 0; i < vs.size(); ++i) {
    EXPECT_EQ(vs.lifted(i)[0], 1.0);
    EXPECT_EQ(vs.lifted(i)[1], vs.component(i, 0));
    EXPECT_EQ(vs.lifted(i)[2], vs.component(i, 1));
  }
  EXPECT_DOUBLE_EQ(vs.breve_v(), 0.5);
  EXPECT_DOUBLE_EQ(vs.max_l1(), 0.5);
}

TEST(Thermo, ConservedOfStateCountsMassAndMomentum) {
  const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
  const auto I = conserved_of_state({0b1101}, vs);  // slots 0, 2, 3
  EXPECT_DOUBLE_EQ(I.rho(), 3.0);
  EXPECT_DOUBLE_EQ(I.p(1), 0.5);
  EXPECT_THROW(conserved_of_state({0b10000}, vs), StructuralError);
}

TEST(Thermo, LogisticIsStableAtExtremes) {
  EXPECT_EQ(logistic(-800.0), 0.0);
  EXPECT_EQ(logistic(800.0), 1.0);
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(-30.0), std::exp(-30.0), 1e-25);
}

// For the pair {+v, -v} the two occupations are θ± = ρ/2 ± p/(2v).
TEST(Thermo, SymmetricPairClosedForm) {
  const double v = 0.5;
  const auto vs = VelocitySet::symmetric_pair(v);
  Philox g(3);
  for (int i = 0; i < 500; ++i) {
    const double tp = 0.01 + 0.98 * g.uniform();
    const double tm = 0.01 + 0.98 * g.uniform();
    const double rho = tp + tm, p = v * (tp - tm);
    const auto lambda = lambda_of_rho_p({vec({rho, p})}, vs);
    const double l0 = 0.5 * (logit(tp) + logit(tm));
    const double l1 = 0.5 * (logit(tp) - logit(tm)) / v;
    EXPECT_NEAR(lambda.values[0], l0, 1e-10 * (1 + std::abs(l0)));
    EXPECT_NEAR(lambda.values[1], l1, 1e-10 * (1 + std::abs(l1)));
    const auto th = theta_field({vec({rho, p})}, vs);
    EXPECT_NEAR(th[0], rho / 2 + p / (2 * v), 1e-12);
    EXPECT_NEAR(th[1], rho / 2 - p / (2 * v), 1e-12);
  }
}

TEST(Thermo, RoundTripOnSeveralSets) {
  const std::vector<VelocitySet> sets{
      VelocitySet::symmetric_pair(0.5),
      VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}}),
      VelocitySet::create(2, {{0.5, 0}, {-0.5, 0}, {0, 0.5}, {0, -0.5}}),
      VelocitySet::create(3, {{0.5, 0, 0}, {-0.5, 0, 0}, {0, 0.5, 0}, {0, -0.5, 0}, {0, 0, 0.5},
                              {0, 0, -0.5}})};
  Philox g(11);
  for (const auto& vs : sets) {
    for (int i = 0; i < 200; ++i) {
      StateVec l(vs.dim() + 1);
      for (Eigen::Index k = 0; k < l.size(); ++k) l[k] = -3.0 + 6.0 * g.uniform();
      const auto target = rho_p_of_lambda({l}, vs);
      const auto back = lambda_of_rho_p(target, vs);
      const auto again = rho_p_of_lambda(back, vs);
      EXPECT_LE((again.values - target.values).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Hull, MatchesOccupationBoundsForPair) {
  const double v = 0.5;
  const auto vs = VelocitySet::symmetric_pair(v);
  Philox g(8);
  for (int i = 0; i < 2000; ++i) {
    const double rho = -0.2 + 2.4 * g.uniform();
    const double p = -0.7 + 1.4 * g.uniform();
    const double tp = rho / 2 + p / (2 * v), tm = rho / 2 - p / (2 * v);
    const double gap = std::min({tp, 1 - tp, tm, 1 - tm});
    if (std::abs(gap) < 1e-9) continue;
    EXPECT_EQ(check_in_U({vec({rho, p})}, vs).inside, gap > 0) << rho << ' ' << p;
  }
}

TEST(Hull, MeansOfProductMeasuresAreInside) {
  const auto vs = VelocitySet::create(2, {{0.5, 0}, {-0.5, 0}, {0, 0.5}, {0, -0.5}});
  const Hull hull(vs);
  Philox g(12);
  for (int i = 0; i < 500; ++i) {
    StateVec l(3);
    for (int k = 0; k < 3; ++k) l[k] = -4.0 + 8.0 * g.uniform();
    EXPECT_TRUE(hull.check(rho_p_of_lambda({l}, vs).values).inside);
  }
  EXPECT_FALSE(hull.check(vec({0.0, 0.0, 0.0})).inside);
  EXPECT_FALSE(hull.check(vec({4.0, 0.0, 0.0})).inside);
  EXPECT_FALSE(hull.check(vec({1.0, 0.6, 0.0})).inside);
  EXPECT_TRUE(hull.check(hull.center()).inside);
}

TEST(Thermo, OutsideTargetIsDomainError) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  EXPECT_THROW(lambda_of_rho_p({vec({1.0, 0.6})}, vs), DomainError);
  EXPECT_THROW(lambda_of_rho_p({vec({2.0, 0.0})}, vs), DomainError);
}

// With |V| = d + 1 the map (ρ,p) -> θ is linear, so midpoints are preserved.
TEST(Thermo, AffineOccupationsWhenSetIsMinimal) {
  const auto vs = VelocitySet::symmetric_pair(0.25);
  Philox g(4);
  for (int i = 0; i < 200; ++i) {
    StateVec a(2), b(2);
    for (int k = 0; k < 2; ++k) {
      a[k] = -2 + 4 * g.uniform();
      b[k] = -2 + 4 * g.uniform();
    }
    const auto x = rho_p_of_lambda({a}, vs), y = rho_p_of_lambda({b}, vs);
    const ConservedVector mid{0.5 * (x.values + y.values)};
    const auto tx = theta_field(x, vs), ty = theta_field(y, vs), tm = theta_field(mid, vs);
    for (int v = 0; v < 2; ++v) EXPECT_NEAR(tm[v], 0.5 * (tx[v] + ty[v]), 1e-10);
  }
}
