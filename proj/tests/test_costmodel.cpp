// tests/test_costmodel.cpp

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "nmrpath/costmodel.hpp"
#include "test_support.hpp"

using namespace nmrpath;
using nmrpath::testing::quadrature_atom_cost;

namespace {

double closed(double mu, double sigma, std::vector<double> xs, std::vector<double> sigmas) {
    return atom_cost(GaussianPrior{mu, sigma}, std::span<const double>(xs), std::span<const double>(sigmas)).cost;
}

}  // namespace

TEST_CASE("atom cost with no observations is zero") {
    const auto s = atom_cost(GaussianPrior{5.0, 2.0}, std::span<const double>{}, std::span<const double>{});
    CHECK(s.cost == 0.0);
    CHECK(s.z() == doctest::Approx(1.0));
}

TEST_CASE("single observation at the prior mean") {
    // Marginal of x is N(0, sqrt(2)); its density at 0 is 1/sqrt(4 pi).
    const double expected = 0.5 * std::log(4.0 * std::numbers::pi);
    CHECK(closed(0.0, 1.0, {0.0}, {1.0}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(closed(0.0, 1.0, {0.0}, {1.0}) == doctest::Approx(1.26551).epsilon(1e-5));
    CHECK(std::abs(quadrature_atom_cost(0.0, 1.0, {0.0}, {1.0}) - expected) < 1e-10);
}

TEST_CASE("two symmetric observations match quadrature") {
    const double q = quadrature_atom_cost(0.0, 1.0, {-1.0, 1.0}, {0.5, 0.5});
    CHECK(std::abs(closed(0.0, 1.0, {-1.0, 1.0}, {0.5, 0.5}) - q) < 1e-8);
}

TEST_CASE("combined mean and sigma") {
    const std::vector<double> xs{1.0, 3.0}, ss{1.0, 1.0};
    const auto s = atom_cost(GaussianPrior{0.0, 1.0}, std::span<const double>(xs), std::span<const double>(ss));
    CHECK(s.sigma == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(s.mean == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("non-positive sigma is rejected") {
    const std::vector<double> xs{1.0}, bad{0.0};
    CHECK_THROWS_AS(atom_cost(GaussianPrior{0.0, 1.0}, std::span<const double>(xs), std::span<const double>(bad)),
                    Error);
    const std::vector<double> ok{1.0};
    CHECK_THROWS_AS(atom_cost(GaussianPrior{0.0, -1.0}, std::span<const double>(xs), std::span<const double>(ok)),
                    Error);
}

TEST_CASE("closed form matches quadrature on random draws") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mu(-10.0, 10.0), sig(0.01, 5.0);
    std::uniform_int_distribution<int> count(1, 6);
    for (int t = 0; t < 200; ++t) {
        const double m = mu(rng), s = sig(rng);
        std::vector<double> xs, ss;
        const int o = count(rng);
        for (int l = 0; l < o; ++l) {
            ss.push_back(sig(rng));
            xs.push_back(m + std::normal_distribution<double>(0.0, s + ss.back())(rng));
        }
        CHECK(std::abs(closed(m, s, xs, ss) - quadrature_atom_cost(m, s, xs, ss)) < 1e-8);
    }
}

TEST_CASE("single-observation cost grows with distance from the prior mean") {
    double last = -1e300;
    for (double d = 0.0; d < 5.0; d += 0.25) {
        const double c = closed(2.0, 0.7, {2.0 + d}, {0.3});
        CHECK(c > last);
        CHECK(closed(2.0, 0.7, {2.0 - d}, {0.3}) == doctest::Approx(c));
        last = c;
    }
}

TEST_CASE("atom cost is invariant under permutation of observations") {
    const double a = closed(1.0, 2.0, {0.5, 1.5, 3.0}, {0.1, 0.2, 0.3});
    const double b = closed(1.0, 2.0, {3.0, 0.5, 1.5}, {0.3, 0.1, 0.2});
    CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("consistent observations cost less than spread ones") {
    for (double d : {0.01, 0.1, 0.5, 2.0})
        CHECK(closed(0.0, 1.0, {0.7, 0.7}, {0.2, 0.2}) <= closed(0.0, 1.0, {0.7 - d, 0.7 + d}, {0.2, 0.2}));
}

TEST_CASE("edge cost sums atom costs") {
    ResidueAtoms atoms{{Atom::CA, {56.0, 2.0}}, {Atom::CB, {30.0, 2.0}}, {Atom::N, {120.0, 4.0}},
                       {Atom::HN, {8.2, 0.6}}};
    CHECK(edge_cost(atoms, {}) == 0.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    AtomObservations obs;
    double expected = 0.0;
    for (const auto& [atom, prior] : atoms) {
        std::vector<double> xs, ss;
        const int o = 1 + static_cast<int>(rng() % 3);
        for (int l = 0; l < o; ++l) {
            Observation ob;
            ob.value = prior.mu + nd(rng) * prior.sigma;
            ob.sigma = 0.1 + 0.1 * l;
            obs[atom].push_back(ob);
            xs.push_back(ob.value);
            ss.push_back(ob.sigma);
        }
        expected += quadrature_atom_cost(prior.mu, prior.sigma, xs, ss);
    }
    CHECK(std::abs(edge_cost(atoms, obs) - expected) < 1e-7);
}

TEST_CASE("typing threshold uses the adversarial realisation") {
    const GaussianPrior prior{0.0, 1.0};
    CHECK(typing_threshold(prior, std::span<const double>{}, 3.0) == 0.0);

    const std::vector<double> one{0.1};
    const auto w1 = adversarial_observations(prior, one, 3.0);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0] == doctest::Approx(3.3));
    CHECK(std::abs(typing_threshold(prior, one, 3.0) - quadrature_atom_cost(0.0, 1.0, {3.3}, {0.1})) < 1e-8);

    const std::vector<double> two{0.1, 0.1};
    const auto w2 = adversarial_observations(prior, two, 3.0);
    REQUIRE(w2.size() == 2);
    CHECK(w2[0] == doctest::Approx(3.3));
    CHECK(w2[1] == doctest::Approx(2.7));
    CHECK(std::abs(typing_threshold(prior, two, 3.0) - quadrature_atom_cost(0.0, 1.0, {3.3, 2.7}, {0.1, 0.1})) <
          1e-8);
}
