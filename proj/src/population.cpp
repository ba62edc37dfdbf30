#include "anchorsim/population.hpp"

#include "anchorsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace anchorsim {

namespace {

constexpr double kLogisticVariance = std::numbers::pi * std::numbers::pi / 3.0;

void require(bool condition, const char *message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

bool FixedEffects::finite() const noexcept {
    return std::isfinite(intercept) && std::isfinite(population) && std::isfinite(distance) &&
           std::isfinite(child_age) && std::isfinite(guardian_age) && std::isfinite(child_male) &&
           std::isfinite(guardian_male);
}

void OutcomeCoefficients::validate() const {
    require(effects.finite(), "outcome coefficients must be finite");
    require(std::isfinite(sigma2) && sigma2 >= 0.0, "outcome sigma2 must be >= 0");
    require(followup_target_rate < 0.0 || (followup_target_rate > 0.0 && followup_target_rate < 1.0),
            "followup_target_rate must be in (0,1) or negative to disable tuning");
}

void SelectionCoefficients::validate() const {
    require(effects.finite(), "selection coefficients must be finite");
    require(std::isfinite(tau2) && tau2 >= 0.0, "selection tau2 must be >= 0");
    require(std::isfinite(xi) && xi > 0.0, "selection odds ratio xi must be > 0");
}

double icc_to_variance(double icc) {
    if (!(icc > 0.0 && icc < 1.0)) {
        throw std::domain_error(fmt::format("ICC must lie in (0,1), got {}", icc));
    }
    return icc * kLogisticVariance / (1.0 - icc);
}

double variance_to_icc(double variance) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw std::domain_error("random-intercept variance must be finite and >= 0");
    }
    return variance / (variance + kLogisticVariance);
}

void PopulationConfig::validate() const {
    require(n_villages >= 1, "n_villages must be >= 1");
    require(min_children_per_village >= 1, "min_children_per_village must be >= 1");
    require(mean_children_per_village >= min_children_per_village,
            "mean_children_per_village must be >= min_children_per_village");
    require(village_size_dispersion > 0.0, "village_size_dispersion must be > 0");
    require(child_share_of_population > 0.0 && child_share_of_population <= 1.0,
            "child_share_of_population must be in (0,1]");
    require(population_noise_sd >= 0.0, "population_noise_sd must be >= 0");
    require(distance_mean_km > 0.0 && distance_max_km > 0.0, "distances must be positive");
    require(child_age_min_months <= child_age_max_months, "child age range must be ordered");
    require(is_probability(child_male_prob) && is_probability(guardian_male_prob),
            "sex probabilities must be in [0,1]");
    require(guardian_age_sd_yr >= 0.0, "guardian_age_sd_yr must be >= 0");
    require(guardian_age_min_yr < guardian_age_max_yr, "guardian age range must be ordered");
    require(baseline_target_rate > 0.0 && baseline_target_rate < 1.0, "baseline_target_rate must be in (0,1)");
    require(icc_vaccination > 0.0 && icc_vaccination < 1.0, "icc_vaccination must be in (0,1)");
    require(icc_selection > 0.0 && icc_selection < 1.0, "icc_selection must be in (0,1)");
}

std::span<const Child> Population::children_of(std::size_t village) const {
    const auto &v = villages.at(village);
    return std::span<const Child>(children).subspan(v.first_child, static_cast<std::size_t>(v.n_children));
}

double Population::baseline_rate() const {
    if (children.empty()) {
        return 0.0;
    }
    long total = 0;
    for (const auto &v : villages) {
        total += v.baseline_vaccinated;
    }
    return static_cast<double>(total) / static_cast<double>(children.size());
}

void Population::check_invariants() const {
    std::size_t expected_first = 0;
    for (std::size_t j = 0; j < villages.size(); ++j) {
        const auto &v = villages[j];
        if (v.id != j || v.first_child != expected_first) {
            throw std::logic_error(fmt::format("village {} is out of order", j));
        }
        if (v.baseline_vaccinated < 0 || v.baseline_vaccinated > v.n_children) {
            throw std::logic_error(fmt::format("village {} baseline count out of range", j));
        }
        if (!std::isfinite(v.baseline_logodds)) {
            throw std::logic_error(fmt::format("village {} baseline log-odds not finite", j));
        }
        for (std::size_t i = v.first_child; i < v.first_child + static_cast<std::size_t>(v.n_children); ++i) {
            if (i >= children.size() || children[i].village_id != j || children[i].id != i) {
                throw std::logic_error(fmt::format("child {} does not belong to village {}", i, j));
            }
        }
        expected_first += static_cast<std::size_t>(v.n_children);
    }
    if (expected_first != children.size()) {
        throw std::logic_error("child count does not match the sum of village sizes");
    }
}

Population synthesize_population(const PopulationConfig &cfg) {
    cfg.validate();
    Rng rng = Rng::stream(cfg.rng_seed, {0, 0, StreamRole::Population});

    // Gamma-Poisson mixture gives a negative binomial with the requested mean.
    const double r = cfg.village_size_dispersion;
    std::gamma_distribution<double> size_rate(r, cfg.mean_children_per_village / r);
    std::exponential_distribution<double> distance(1.0 / cfg.distance_mean_km);
    std::uniform_int_distribution<int> child_age(cfg.child_age_min_months, cfg.child_age_max_months);

    Population pop;
    pop.villages.resize(static_cast<std::size_t>(cfg.n_villages));
    std::size_t next_child = 0;
    for (std::size_t j = 0; j < pop.villages.size(); ++j) {
        auto &v = pop.villages[j];
        v.id = j;
        int size = 0;
        do {
            std::poisson_distribution<int> count(size_rate(rng));
            size = count(rng);
        } while (size < cfg.min_children_per_village);
        v.n_children = size;
        v.first_child = next_child;
        next_child += static_cast<std::size_t>(size);

        v.population_total = std::round(size / cfg.child_share_of_population *
                                        std::exp(cfg.population_noise_sd * rng.normal()));
        double d = 0.0;
        do {
            d = distance(rng);
        } while (d > cfg.distance_max_km);
        v.distance_km = d;
    }

    // Centre and scale the village population totals.
    const double n = static_cast<double>(pop.villages.size());
    const double mean =
        std::accumulate(pop.villages.begin(), pop.villages.end(), 0.0,
                        [](double acc, const Village &v) { return acc + v.population_total; }) / n;
    double ss = 0.0;
    for (const auto &v : pop.villages) {
        ss += (v.population_total - mean) * (v.population_total - mean);
    }
    const double sd = pop.villages.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    for (auto &v : pop.villages) {
        v.population_scaled = sd > 0.0 ? (v.population_total - mean) / sd : 0.0;
    }

    pop.children.resize(next_child);
    for (const auto &v : pop.villages) {
        for (int k = 0; k < v.n_children; ++k) {
            const std::size_t i = v.first_child + static_cast<std::size_t>(k);
            auto &c = pop.children[i];
            c.id = i;
            c.village_id = v.id;
            c.age_months = child_age(rng);
            c.male = rng.bernoulli(cfg.child_male_prob);
            double age = 0.0;
            do {
                age = rng.normal(cfg.guardian_age_mean_yr, cfg.guardian_age_sd_yr);
            } while (age < cfg.guardian_age_min_yr || age > cfg.guardian_age_max_yr);
            c.guardian_age_yr = age;
            c.guardian_male = rng.bernoulli(cfg.guardian_male_prob);
        }
    }
    return pop;
}

double linear_predictor(const FixedEffects &e, const Village &v, const Child &c) noexcept {
    return e.intercept + e.population * v.population_scaled + e.distance * v.distance_km +
           e.child_age * c.age_months + e.guardian_age * c.guardian_age_yr + e.child_male * (c.male ? 1.0 : 0.0) +
           e.guardian_male * (c.guardian_male ? 1.0 : 0.0);
}

double continuity_logodds(int vaccinated, int n_children) noexcept {
    return std::log((vaccinated + 0.5) / (n_children - vaccinated + 0.5));
}

double expected_prevalence(std::span<const double> base_eta, double intercept_shift, double sigma2) {
    static const NormalQuadrature quadrature(40);
    if (base_eta.empty()) {
        return 0.0;
    }
    const double sd = std::sqrt(sigma2);
    double total = 0.0;
    for (double eta : base_eta) {
        total += quadrature.expected_expit(eta + intercept_shift, sd);
    }
    return total / static_cast<double>(base_eta.size());
}

Population generate_baseline(Population pop, const PopulationConfig &cfg, const OutcomeCoefficients &coeffs,
                             Rng &rng) {
    cfg.validate();
    if (!coeffs.effects.finite()) {
        throw std::invalid_argument("baseline coefficients must be finite");
    }
    const double sigma2 = icc_to_variance(cfg.icc_vaccination);

    FixedEffects slopes = coeffs.effects;
    slopes.intercept = 0.0;
    std::vector<double> eta(pop.children.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        eta[i] = linear_predictor(slopes, pop.villages[pop.children[i].village_id], pop.children[i]);
    }
    const auto tuned = bisect_increasing(
        [&](double b0) { return expected_prevalence(eta, b0, sigma2); }, cfg.baseline_target_rate, -20.0, 20.0,
        1e-6, 200, "baseline intercept");
    pop.baseline_intercept = tuned.root;

    const double sd = std::sqrt(sigma2);
    for (auto &v : pop.villages) {
        const double alpha = sd * rng.normal();
        int vaccinated = 0;
        for (int k = 0; k < v.n_children; ++k) {
            const std::size_t i = v.first_child + static_cast<std::size_t>(k);
            vaccinated += rng.bernoulli(expit(tuned.root + eta[i] + alpha)) ? 1 : 0;
        }
        v.baseline_vaccinated = vaccinated;
        v.baseline_logodds = continuity_logodds(vaccinated, v.n_children);
    }
    return pop;
}

Population build_census(const PopulationConfig &cfg, const OutcomeCoefficients &coeffs) {
    Population pop = synthesize_population(cfg);
    Rng rng = Rng::stream(cfg.rng_seed, {0, 0, StreamRole::Baseline});
    return generate_baseline(std::move(pop), cfg, coeffs, rng);
}

void write_population_csv(const Population &pop, std::ostream &out) {
    out << "child_id,village_id,age_months,male,guardian_age_yr,guardian_male,village_n_children,"
           "population_total,population_scaled,distance_km,baseline_vaccinated,baseline_logodds\n";
    for (const auto &c : pop.children) {
        const auto &v = pop.villages[c.village_id];
        out << fmt::format("{},{},{},{},{:.17g},{},{},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", c.id, c.village_id,
                           c.age_months, c.male ? 1 : 0, c.guardian_age_yr, c.guardian_male ? 1 : 0, v.n_children,
                           v.population_total, v.population_scaled, v.distance_km, v.baseline_vaccinated,
                           v.baseline_logodds);
    }
}

} // namespace anchorsim
