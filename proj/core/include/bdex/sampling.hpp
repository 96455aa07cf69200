#pragma once

#include <array>
#include <functional>

#include "bdex/lattice.hpp"
#include "bdex/rng.hpp"

namespace bdex {

/// Product measure μ^N_λ: every η(x, v) independent Bernoulli(θ_v(λ)).
/// Sites are visited in index order, velocities in set order.
Configuration sample_product_state(const ChemicalPotential& lambda, const Lattice& lattice,
                                   const VelocitySet& vs, Philox& rng);

/// Profile of conserved densities, evaluated at the macroscopic position x/N.
using ConservedProfile = std::function<StateVec(const std::array<double, kMaxDim>& u)>;

/// Local equilibrium ν^N_γ: site x drawn from m_{Λ(γ(x/N))}.
Configuration sample_local_equilibrium(const ConservedProfile& gamma, const Lattice& lattice,
                                       const VelocitySet& vs, Philox& rng);

}  // namespace bdex
