// include/nmrpath/costmodel.hpp
// Expected-likelihood atom cost under a Gaussian prior with Gaussian
// measurement noise, the per-edge residue cost, and the typing threshold.

#pragma once

#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "nmrpath/domain.hpp"

namespace nmrpath {

struct GaussianPosteriorSummary {
    double sigma = 0.0;  // combined std of the product density
    double mean = 0.0;   // combined mean
    double log_z = 0.0;  // log of the marginal density value
    double cost = 0.0;   // -log_z

    // Density value; underflows for large costs, so callers should prefer log_z.
    double z() const { return std::exp(log_z); }
};

// Marginal of the observations with the latent shift integrated against the
// prior: cost = -log E_{mu ~ N(prior)} prod_l N(x_l | mu, sigma_l).
// Throws NonPositiveSigma for a non-positive prior or observation sigma.
GaussianPosteriorSummary atom_cost(const GaussianPrior& prior, std::span<const Observation> obs);

// Same, with observations given as parallel value/sigma arrays.
GaussianPosteriorSummary atom_cost(const GaussianPrior& prior, std::span<const double> values,
                                   std::span<const double> sigmas);

// Sum of atom costs over the atoms of one residue. `assigned` maps atoms to
// their observations; atoms without observations contribute zero.
using ResidueAtoms = std::map<Atom, GaussianPrior>;
using AtomObservations = std::map<Atom, std::vector<Observation>>;
double edge_cost(const ResidueAtoms& residue_atoms, const AtomObservations& assigned);

// Points of the adversarial realisation: w_l = mu + delta*sigma_a + (-1)^(l+1) delta*sigma_l.
std::vector<double> adversarial_observations(const GaussianPrior& prior, std::span<const double> noises,
                                             double delta);

// Atom cost at the adversarial realisation; 0 when no observations are expected.
double typing_threshold(const GaussianPrior& prior, std::span<const double> noises, double delta);

}  // namespace nmrpath
