#include "bdex/sampling.hpp"

#include <vector>

namespace bdex {

Configuration sample_product_state(const ChemicalPotential& lambda, const Lattice& lattice,
                                   const VelocitySet& vs, Philox& rng) {
  std::vector<double> th(vs.size());
  thetas(lambda.values, vs, th);
  Configuration eta(lattice.site_count(), vs.size());
  for (Site x = 0; x < lattice.site_count(); ++x)
    for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, rng.bernoulli(th[v]));
  return eta;
}

Configuration sample_local_equilibrium(const ConservedProfile& gamma, const Lattice& lattice,
                                       const VelocitySet& vs, Philox& rng) {
  std::vector<double> th(vs.size());
  Configuration eta(lattice.site_count(), vs.size());
  for (Site x = 0; x < lattice.site_count(); ++x) {
    const auto lambda = lambda_of_rho_p({gamma(lattice.position(x))}, vs);
    thetas(lambda.values, vs, th);
    for (std::size_t v = 0; v < vs.size(); ++v) eta.set(x, v, rng.bernoulli(th[v]));
  }
  return eta;
}

}  // namespace bdex
