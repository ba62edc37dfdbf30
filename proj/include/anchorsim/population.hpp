#pragma once

#include "anchorsim/coefficients.hpp"
#include "anchorsim/random.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace anchorsim {

struct PopulationConfig {
    int n_villages = 381;
    int min_children_per_village = 5;
    double mean_children_per_village = 25.0;
    /// Negative-binomial size parameter of the untruncated village size draw.
    double village_size_dispersion = 10.0;
    /// Children 12-24 months as a share of the whole village population.
    double child_share_of_population = 0.04;
    double population_noise_sd = 0.25;
    double distance_mean_km = 5.0;
    double distance_max_km = 30.0;
    int child_age_min_months = 12;
    int child_age_max_months = 24;
    double child_male_prob = 0.459;
    double guardian_male_prob = 0.070;
    double guardian_age_mean_yr = 29.4;
    double guardian_age_sd_yr = 9.68;
    double guardian_age_min_yr = 15.0;
    double guardian_age_max_yr = 86.0;
    double baseline_target_rate = 0.73;
    double icc_vaccination = 1.0 / 3.0;
    double icc_selection = 1.0 / 3.0;
    std::uint64_t rng_seed = 20240601;

    void validate() const;
};

struct Village {
    std::size_t id = 0;
    int n_children = 0;
    std::size_t first_child = 0; ///< children of this village are contiguous
    double population_total = 0.0;
    double population_scaled = 0.0;
    double distance_km = 0.0;
    int baseline_vaccinated = 0;
    double baseline_logodds = 0.0;

    bool operator==(const Village &) const = default;
};

struct Child {
    std::size_t id = 0;
    std::size_t village_id = 0;
    int age_months = 0;
    bool male = false;
    double guardian_age_yr = 0.0;
    bool guardian_male = false;

    bool operator==(const Child &) const = default;
};

struct Population {
    std::vector<Village> villages;
    std::vector<Child> children;
    /// Intercept that produced the baseline counts (tuned to the target rate).
    double baseline_intercept = 0.0;

    std::size_t total_children() const noexcept { return children.size(); }
    std::size_t n_villages() const noexcept { return villages.size(); }
    std::span<const Child> children_of(std::size_t village) const;
    double baseline_rate() const;

    /// Throws std::logic_error when a structural invariant is broken.
    void check_invariants() const;

    bool operator==(const Population &) const = default;
};

/// Villages, children and covariates; baseline counts are left empty.
Population synthesize_population(const PopulationConfig &cfg);

/// Linear predictor of `effects` (intercept included) for one child.
double linear_predictor(const FixedEffects &effects, const Village &village, const Child &child) noexcept;

/// log((y + 0.5) / (k - y + 0.5)).
double continuity_logodds(int vaccinated, int n_children) noexcept;

/// Expected prevalence over the whole population when every child gets
/// `intercept_shift` added to `base_eta[i]` and a N(0, sigma2) village intercept.
double expected_prevalence(std::span<const double> base_eta, double intercept_shift, double sigma2);

/// Tunes the baseline intercept to cfg.baseline_target_rate, then draws the
/// baseline census counts with village intercepts of variance icc_to_variance(icc).
Population generate_baseline(Population pop, const PopulationConfig &cfg, const OutcomeCoefficients &coeffs,
                             Rng &rng);

/// synthesize_population + generate_baseline with streams derived from cfg.rng_seed.
Population build_census(const PopulationConfig &cfg, const OutcomeCoefficients &coeffs);

/// One row per child with the village attributes joined.
void write_population_csv(const Population &pop, std::ostream &out);

} // namespace anchorsim
