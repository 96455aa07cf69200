#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "bdex/dynamics.hpp"
#include "bdex/empirical.hpp"
#include "bdex/hydro.hpp"
#include "bdex/thermo.hpp"

using namespace bdex;

namespace {

// Runs `property` on `cases` generators derived from one seed; a failure
// names the case so it can be replayed alone.
void for_all(std::uint64_t seed, int cases, const std::function<void(Philox&)>& property) {
  for (int c = 0; c < cases; ++c) {
    Philox g = Philox(seed).split(static_cast<std::uint64_t>(c));
    SCOPED_TRACE("case " + std::to_string(c) + " of seed " + std::to_string(seed));
    property(g);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

// Symmetric set closed under reflections and permutations, always containing
// the axis velocities so that (1, v) spans.
VelocitySet random_velocities(Philox& g) {
  const int d = 1 + static_cast<int>(g.below(3));
  const double levels[] = {0.125, 0.25, 0.375, 0.5};
  std::set<std::vector<double>> out;
  std::vector<std::vector<double>> seeds{std::vector<double>(d, 0.0)};
  seeds[0][0] = levels[g.below(4)];
  if (g.bernoulli(0.6)) {
    std::vector<double> extra(d, 0.0);
    double budget = 1.0;
    for (int j = 0; j < d; ++j) {
      const double c = std::min(budget, levels[g.below(4)]);
      if (g.bernoulli(0.7)) {
        extra[j] = c;
        budget -= c;
      }
    }
    seeds.push_back(extra);
  }
  for (auto v : seeds) {
    std::sort(v.begin(), v.end());
    do {
      for (int mask = 0; mask < (1 << d); ++mask) {
        auto w = v;
        for (int j = 0; j < d; ++j)
          if (mask >> j & 1) w[j] = -w[j];
        bool zero = std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; });
        if (!zero) out.insert(w);
      }
    } while (std::next_permutation(v.begin(), v.end()));
  }
  if (out.size() > kMaxVelocities) return random_velocities(g);
  return VelocitySet::create(d, {out.begin(), out.end()});
}

StateVec random_lambda(int d, Philox& g, double span = 3.0) {
  StateVec l(d + 1);
  for (int k = 0; k <= d; ++k) l[k] = -span + 2 * span * g.uniform();
  return l;
}

Model random_model(Philox& g, int N, const VelocitySet& vs, DynamicsOptions o) {
  std::vector<double> a, b;
  for (std::size_t v = 0; v < vs.size(); ++v) {
    a.push_back(0.05 + 0.9 * g.uniform());
    b.push_back(0.05 + 0.9 * g.uniform());
  }
  return Model(Lattice(N, vs.dim()), vs, ReservoirProfiles::constant(a, b), o);
}

}  // namespace

TEST(Property, LambdaInversionRoundTrips) {
  for_all(101, 60, [](Philox& g) {
    const auto vs = random_velocities(g);
    for (int i = 0; i < 20; ++i) {
      const auto target = rho_p_of_lambda({random_lambda(vs.dim(), g)}, vs);
      ASSERT_TRUE(check_in_U(target, vs).inside);
      const auto back = rho_p_of_lambda(lambda_of_rho_p(target, vs), vs);
      ASSERT_LE((back.values - target.values).cwiseAbs().maxCoeff(), 1e-12);
    }
  });
}

TEST(Property, HullMarginIsSymmetricAboutCenter) {
  for_all(102, 40, [](Philox& g) {
    const auto vs = random_velocities(g);
    const Hull hull(vs);
    for (int i = 0; i < 20; ++i) {
      StateVec x = hull.center();
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] += (g.uniform() - 0.5) * 2;
      const StateVec mirror = 2 * hull.center() - x;
      ASSERT_NEAR(hull.margin(x), hull.margin(mirror), 1e-12);
    }
  });
}

TEST(Property, EveryEventConservesWhatItShould) {
  for_all(103, 20, [](Philox& g) {
    const auto vs = random_velocities(g);
    const int N = vs.dim() == 1 ? 8 : 4;
    const auto m = random_model(g, N, vs, {});
    Configuration eta(m.lattice().site_count(), vs.size());
    for (Site x = 0; x < eta.site_count(); ++x)
      for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, g.bernoulli(0.5));
    Simulator sim(m, eta, g.split(1));
    for (int i = 0; i < 2000; ++i) {
      const Configuration before = sim.state();
      const auto before_totals = totals(before, m.lattice(), vs);
      const auto r = sim.step();
      if (!std::isfinite(r.waiting_time)) break;
      const auto after_totals = totals(sim.state(), m.lattice(), vs);
      const auto& e = r.event;
      if (e.kind == EventKind::Collision) {
        ASSERT_EQ(conserved_of_state(before.local(e.site), vs).values,
                  conserved_of_state(sim.state().local(e.site), vs).values);
      }
      if (e.kind != EventKind::Boundary) {
        ASSERT_LE((after_totals.values - before_totals.values).cwiseAbs().maxCoeff(), 1e-12);
      } else {
        const double sign = before.get(e.site, e.velocity) ? -1.0 : 1.0;
        ASSERT_LE((after_totals.values - before_totals.values - sign * vs.lifted(e.velocity))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
      }
    }
  });
}

TEST(Property, GeneratorRowsSumToZero) {
  for_all(104, 30, [](Philox& g) {
    VelocitySet vs = g.bernoulli(0.5) ? VelocitySet::symmetric_pair(0.5)
                                      : VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
    const int N = vs.size() == 2 ? 2 + static_cast<int>(g.below(4)) : 2 + static_cast<int>(g.below(2));
    const DynamicsOptions o{g.bernoulli(0.7), g.bernoulli(0.7), g.bernoulli(0.7)};
    const auto gen = assemble_exact_generator(random_model(g, N, vs, o));
    ASSERT_LE(gen.row_sum_residual(), 1e-12);
  });
}

TEST(Property, SamplerTotalTracksRates) {
  for_all(105, 20, [](Philox& g) {
    const std::size_t n = 1 + g.below(300);
    CompositionRejection s(n);
    std::vector<double> ref(n, 0.0);
    for (int k = 0; k < 2000; ++k) {
      const auto i = g.below(n);
      ref[i] = g.bernoulli(0.3) ? 0.0 : std::ldexp(g.uniform_pos(), static_cast<int>(g.below(30)) - 15);
      s.set(i, ref[i]);
      double total = 0;
      for (double r : ref) total += r;
      ASSERT_NEAR(s.total(), total, 1e-9 * std::max(total, 1.0));
      if (total > 0) ASSERT_GT(ref[s.sample(g)], 0.0);
    }
  });
}

TEST(Property, CheckpointRoundTrips) {
  for_all(106, 20, [](Philox& g) {
    const auto vs = random_velocities(g);
    const Lattice lat(2 + static_cast<int>(g.below(6)), vs.dim());
    Configuration eta(lat.site_count(), vs.size());
    for (Site x = 0; x < eta.site_count(); ++x)
      for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, g.bernoulli(g.uniform()));
    std::stringstream buf;
    write_checkpoint(buf, eta, lat);
    ASSERT_EQ(read_checkpoint(buf, lat, vs), eta);
  });
}

TEST(Property, SmoothingIsLinearInTheField) {
  for_all(107, 20, [](Philox& g) {
    const Grid grid(1, 41);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(2, 41), b = Eigen::MatrixXd::Random(2, 41);
    a(0, 0) += g.uniform();
    const double s = g.uniform() * 4 - 2;
    const double eps = 0.05 + 0.2 * g.uniform();
    const auto fa = smooth_field(a, grid, eps), fb = smooth_field(b, grid, eps);
    const auto fab = smooth_field(a + s * b, grid, eps);
    ASSERT_LE((fab.values - fa.values - s * fb.values).cwiseAbs().maxCoeff(), 1e-12);
  });
}

TEST(Property, SmoothedMassIsNonnegativeAndBounded) {
  for_all(108, 20, [](Philox& g) {
    const auto vs = VelocitySet::create(1, {{0.5}, {-0.5}, {0.25}, {-0.25}});
    const int N = 10 + static_cast<int>(g.below(50));
    const Lattice lat(N, 1);
    Configuration eta(lat.site_count(), vs.size());
    for (Site x = 0; x < eta.site_count(); ++x)
      for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, g.bernoulli(0.5));
    const double eps = 0.1;
    const auto f = smooth(empirical_measure(eta, lat, vs), eps, Grid(1, 41));
    // Each atom of mass at most |V|/N; a box of half-width eps holds at most
    // 2 eps N + 1 of them over a volume of at least eps.
    const double cap = vs.size() * (2 * eps * N + 1) / N / eps;
    ASSERT_GE(f.values.row(0).minCoeff(), 0.0);
    ASSERT_LE(f.values.row(0).maxCoeff(), cap);
  });
}

TEST(Property, TestFunctionsAreLinear) {
  for_all(109, 40, [](Philox& g) {
    const int d = 1 + static_cast<int>(g.below(3));
    TestFunction G(d, 1.0), H(d, 1.0), sum(d, 1.0);
    const double a = g.uniform() * 2 - 1;
    for (int i = 0; i < 4; ++i) {
      Mode m{static_cast<int>(g.below(d + 1)), static_cast<int>(g.below(4)),
             {1 + static_cast<int>(g.below(4)), {d > 1 ? static_cast<int>(g.below(5)) - 2 : 0, 0}}};
      const double c = g.uniform() - 0.5;
      (i % 2 ? G : H).add(m, c);
      sum.add(m, i % 2 ? c : a * c);
    }
    const std::array<double, kMaxDim> u{g.uniform(), g.uniform(), g.uniform()};
    const double t = g.uniform();
    const auto pg = G.evaluate(t, u), ph = H.evaluate(t, u), ps = sum.evaluate(t, u);
    ASSERT_LE((ps.value - pg.value - a * ph.value).cwiseAbs().maxCoeff(), 1e-13);
    ASSERT_LE((ps.laplacian - pg.laplacian - a * ph.laplacian).cwiseAbs().maxCoeff(), 1e-10);
    for (int i = 0; i < d; ++i)
      ASSERT_LE((ps.grad[i] - pg.grad[i] - a * ph.grad[i]).cwiseAbs().maxCoeff(), 1e-12);
  });
}

TEST(Property, PiInnerProductIsSymmetricAndPositive) {
  const auto vs = VelocitySet::symmetric_pair(0.5);
  const Grid grid(1, 33);
  const auto traj = FieldTrajectory::sample(grid, vs, {0.0, 0.1, 0.2, 0.3},
                                            [](double t, const std::array<double, kMaxDim>& u) {
                                              StateVec s(2);
                                              s << 0.8 + 0.2 * u[0] + 0.1 * t, 0.05 * std::cos(3 * u[0]);
                                              return s;
                                            });
  const TrajectoryQuadrature q(traj);
  for_all(110, 30, [&](Philox& g) {
    TestFunction G(1, 0.3), H(1, 0.3);
    for (int i = 0; i < 3; ++i) {
      G.add({static_cast<int>(g.below(2)), static_cast<int>(g.below(3)), {1 + static_cast<int>(g.below(3)), {}}},
            g.uniform() - 0.5);
      H.add({static_cast<int>(g.below(2)), static_cast<int>(g.below(3)), {1 + static_cast<int>(g.below(3)), {}}},
            g.uniform() - 0.5);
    }
    ASSERT_NEAR(pi_inner(q, G, H), pi_inner(q, H, G), 1e-14);
    ASSERT_GE(pi_inner(q, G, G), 0.0);
    const double s = g.uniform() * 3;
    ASSERT_NEAR(linear_part(q, G.scaled(s)), s * linear_part(q, G), 1e-12 * (1 + std::abs(linear_part(q, G))));
  });
}
