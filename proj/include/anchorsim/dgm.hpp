#pragma once

#include "anchorsim/coefficients.hpp"
#include "anchorsim/population.hpp"
#include "anchorsim/random.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace anchorsim {

struct Scenario {
    double village_fraction = 0.5;
    double response_rate_target = 0.65;
    double xi = 1.0;
    double gamma0_tuned = 0.0;
    std::size_t ordinal = 0;
    std::string scenario_id;
};

/// Canonical identifier, e.g. "f0.50_r0.65_xi1.2".
std::string make_scenario_id(double village_fraction, double response_rate, double xi);

struct Followup {
    std::vector<std::uint8_t> y1;
    double p_true = 0.0; ///< mean of y1 over all N children
};

struct Sample {
    std::vector<std::size_t> sampled_villages; ///< sorted village ids
    std::vector<std::size_t> respondents;      ///< sorted child ids
};

struct Realization {
    Followup followup;
    std::vector<std::uint8_t> attended;
    Sample sample;
};

/// Copy of `oc` whose intercept makes the expected follow-up prevalence equal
/// oc.followup_target_rate (unchanged when the target is negative).
OutcomeCoefficients tune_followup_intercept(const Population &pop, const OutcomeCoefficients &oc);

/// Y1 draws with fresh N(0, sigma2) village intercepts and the village
/// baseline log-odds as offset.
Followup generate_followup(const Population &pop, const OutcomeCoefficients &oc, Rng &rng);

/// Attendance draws with fresh N(0, tau2) village intercepts; vaccinated
/// children have their attendance odds multiplied by xi.
std::vector<std::uint8_t> generate_attendance(const Population &pop, const std::vector<std::uint8_t> &y1,
                                              const SelectionCoefficients &sc, Rng &rng);

/// round(fraction * M) villages by simple random sampling without replacement;
/// respondents are the attendees of the sampled villages.
Sample draw_sample(const Population &pop, const std::vector<std::uint8_t> &attended, double village_fraction,
                   Rng &rng);

/// Unweighted mean of per-village attendance proportions, or the child-weighted
/// overall proportion when `child_weighted`.
double attendance_rate(const Population &pop, const std::vector<std::uint8_t> &attended, bool child_weighted);

struct TuningConfig {
    int replicates = 50;
    double tolerance = 0.005;
    double gamma_lo = -10.0;
    double gamma_hi = 10.0;
    int max_iterations = 30;
    bool child_weighted_rate = false;
    std::uint64_t seed = 7;
};

struct GammaTuning {
    double gamma0 = 0.0;
    double achieved_rate = 0.0;
    int iterations = 0;
};

/// Bisection on the selection intercept so the Monte Carlo attendance rate
/// (common random numbers across evaluations) matches `target_rate`.
/// Throws TuningError when the target is not reachable inside the bracket.
GammaTuning tune_gamma0(const Population &pop, const OutcomeCoefficients &oc, const SelectionCoefficients &sc,
                        double target_rate, const TuningConfig &cfg);

} // namespace anchorsim
