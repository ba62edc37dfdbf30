#include "anchorsim/coefficients.hpp"
#include "anchorsim/numeric.hpp"
#include "anchorsim/population.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace anchorsim;

TEST_SUITE("population") {

TEST_CASE("defaults respect the structural constraints") {
    PopulationConfig cfg;
    cfg.rng_seed = 1;
    const Population pop = synthesize_population(cfg);
    CHECK(pop.n_villages() == 381);
    for (const auto &v : pop.villages) {
        CHECK(v.n_children >= 5);
        CHECK(v.distance_km >= 0.0);
        CHECK(v.distance_km <= 30.0);
    }
    for (const auto &c : pop.children) {
        CHECK(c.age_months >= 12);
        CHECK(c.age_months <= 24);
        CHECK(c.guardian_age_yr >= 15.0);
        CHECK(c.guardian_age_yr <= 86.0);
    }
    CHECK_NOTHROW(pop.check_invariants());
}

TEST_CASE("mean child age is close to 18 months") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        PopulationConfig cfg;
        cfg.rng_seed = seed;
        const Population pop = synthesize_population(cfg);
        double sum = 0.0;
        for (const auto &c : pop.children) {
            sum += c.age_months;
        }
        CHECK(std::abs(sum / pop.children.size() - 18.0) < 0.2);
    }
}

TEST_CASE("covariate shares follow the configured probabilities") {
    PopulationConfig cfg;
    const Population pop = synthesize_population(cfg);
    double male = 0.0, gmale = 0.0;
    for (const auto &c : pop.children) {
        male += c.male;
        gmale += c.guardian_male;
    }
    const double n = static_cast<double>(pop.children.size());
    // roughly four binomial sds at N ~ 9500
    CHECK(std::abs(male / n - 0.459) < 0.021);
    CHECK(std::abs(gmale / n - 0.070) < 0.011);
    CHECK(std::abs(n / 381.0 - 25.0) < 3.0);
}

TEST_CASE("same config and seed give identical populations") {
    PopulationConfig cfg;
    cfg.rng_seed = 77;
    const OutcomeCoefficients oc;
    CHECK(build_census(cfg, oc) == build_census(cfg, oc));
    PopulationConfig other = cfg;
    other.rng_seed = 78;
    CHECK_FALSE(build_census(other, oc) == build_census(cfg, oc));
}

TEST_CASE("continuity corrected log-odds stay finite at the extremes") {
    CHECK(continuity_logodds(0, 10) == doctest::Approx(std::log(0.5 / 10.5)));
    CHECK(continuity_logodds(0, 10) == doctest::Approx(-3.0445).epsilon(1e-4));
    CHECK(continuity_logodds(10, 10) == doctest::Approx(std::log(10.5 / 0.5)));
    CHECK(continuity_logodds(5, 10) == doctest::Approx(0.0));
}

TEST_CASE("homogeneous model tunes the baseline intercept to logit of the target") {
    PopulationConfig cfg;
    cfg.n_villages = 40;
    cfg.icc_vaccination = 1e-9; // sigma2 is numerically zero
    OutcomeCoefficients oc;
    oc.effects = FixedEffects{};
    const Population pop = build_census(cfg, oc);
    CHECK(pop.baseline_intercept == doctest::Approx(logit(0.73)).epsilon(1e-5));
    std::vector<double> eta(pop.children.size(), 0.0);
    CHECK(expected_prevalence(eta, pop.baseline_intercept, 0.0) == doctest::Approx(0.73).epsilon(1e-6));
}

TEST_CASE("baseline rate lands in [0.70, 0.76] for each of 20 seeds") {
    const OutcomeCoefficients oc;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        PopulationConfig cfg;
        cfg.rng_seed = seed;
        const double rate = build_census(cfg, oc).baseline_rate();
        CHECK(rate >= 0.70);
        CHECK(rate <= 0.76);
    }
}

TEST_CASE("expected prevalence is increasing in the shift") {
    const std::vector<double> eta{-1.0, 0.0, 0.5, 2.0};
    double last = 0.0;
    for (double shift = -3.0; shift <= 3.0; shift += 0.5) {
        const double p = expected_prevalence(eta, shift, 1.6);
        CHECK(p > last);
        last = p;
    }
}

TEST_CASE("population csv has one row per child") {
    PopulationConfig cfg;
    cfg.n_villages = 12;
    const Population pop = build_census(cfg, OutcomeCoefficients{});
    std::ostringstream out;
    write_population_csv(pop, out);
    const std::string text = out.str();
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == pop.children.size() + 1);
    CHECK(text.rfind("child_id,village_id,", 0) == 0);
}

}
