// src/costmodel.cpp

#include "nmrpath/costmodel.hpp"

#include <numbers>

namespace nmrpath {

GaussianPosteriorSummary atom_cost(const GaussianPrior& prior, std::span<const double> values,
                                   std::span<const double> sigmas) {
    if (values.size() != sigmas.size())
        throw Error(ErrorCode::InvalidArgument, "values and sigmas differ in length");
    if (!(prior.sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "prior sigma");
    for (double s : sigmas)
        if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "observation sigma");

    // Treat the prior as one more weighted point; work relative to its mean so
    // the quadratic form does not cancel at ppm magnitudes.
    const double w0 = 1.0 / (prior.sigma * prior.sigma);
    double wsum = w0;
    double wdev = 0.0;
    for (std::size_t l = 0; l < values.size(); ++l) {
        const double w = 1.0 / (sigmas[l] * sigmas[l]);
        wsum += w;
        wdev += w * (values[l] - prior.mu);
    }
    const double shift = wdev / wsum;  // M_a - mu_a
    double quad = w0 * shift * shift;
    double log_sigma_obs = 0.0;
    for (std::size_t l = 0; l < values.size(); ++l) {
        const double w = 1.0 / (sigmas[l] * sigmas[l]);
        const double d = (values[l] - prior.mu) - shift;
        quad += w * d * d;
        log_sigma_obs += std::log(sigmas[l]);
    }

    GaussianPosteriorSummary s;
    const double var = 1.0 / wsum;
    s.sigma = std::sqrt(var);
    s.mean = prior.mu + shift;
    const double o = static_cast<double>(values.size());
    s.log_z = -0.5 * o * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(var) - std::log(prior.sigma) -
              log_sigma_obs - 0.5 * quad;
    s.cost = -s.log_z;
    return s;
}

GaussianPosteriorSummary atom_cost(const GaussianPrior& prior, std::span<const Observation> obs) {
    std::vector<double> values, sigmas;
    values.reserve(obs.size());
    sigmas.reserve(obs.size());
    for (const auto& o : obs) {
        values.push_back(o.value);
        sigmas.push_back(o.sigma);
    }
    return atom_cost(prior, values, sigmas);
}

double edge_cost(const ResidueAtoms& residue_atoms, const AtomObservations& assigned) {
    for (const auto& [atom, obs] : assigned)
        if (!obs.empty() && residue_atoms.count(atom) == 0)
            throw Error(ErrorCode::InvalidArgument,
                        "observations for atom " + std::string(to_string(atom)) + " not carried by residue");
    double total = 0.0;
    for (const auto& [atom, prior] : residue_atoms) {
        auto it = assigned.find(atom);
        if (it == assigned.end() || it->second.empty()) continue;
        total += atom_cost(prior, it->second).cost;
    }
    return total;
}

std::vector<double> adversarial_observations(const GaussianPrior& prior, std::span<const double> noises,
                                             double delta) {
    std::vector<double> w;
    w.reserve(noises.size());
    for (std::size_t l = 0; l < noises.size(); ++l) {
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;  // l is 0-based here
        w.push_back(prior.mu + delta * prior.sigma + sign * delta * noises[l]);
    }
    return w;
}

double typing_threshold(const GaussianPrior& prior, std::span<const double> noises, double delta) {
    if (noises.empty()) return 0.0;
    const auto w = adversarial_observations(prior, noises, delta);
    return atom_cost(prior, w, noises).cost;
}

}  // namespace nmrpath
