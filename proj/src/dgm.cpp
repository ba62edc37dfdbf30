#include "anchorsim/dgm.hpp"

#include "anchorsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <stdexcept>

namespace anchorsim {

std::string make_scenario_id(double village_fraction, double response_rate, double xi) {
    return fmt::format("f{:.2f}_r{:.2f}_xi{:.1f}", village_fraction, response_rate, xi);
}

namespace {

std::vector<double> slopes_only(const Population &pop, const FixedEffects &effects) {
    FixedEffects slopes = effects;
    slopes.intercept = 0.0;
    std::vector<double> eta(pop.children.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const auto &c = pop.children[i];
        eta[i] = linear_predictor(slopes, pop.villages[c.village_id], c);
    }
    return eta;
}

} // namespace

OutcomeCoefficients tune_followup_intercept(const Population &pop, const OutcomeCoefficients &oc) {
    oc.validate();
    if (oc.followup_target_rate < 0.0) {
        return oc;
    }
    std::vector<double> eta = slopes_only(pop, oc.effects);
    for (std::size_t i = 0; i < eta.size(); ++i) {
        eta[i] += pop.villages[pop.children[i].village_id].baseline_logodds;
    }
    const auto tuned =
        bisect_increasing([&](double b0) { return expected_prevalence(eta, b0, oc.sigma2); },
                          oc.followup_target_rate, -20.0, 20.0, 1e-6, 200, "follow-up intercept");
    OutcomeCoefficients out = oc;
    out.effects.intercept = tuned.root;
    return out;
}

Followup generate_followup(const Population &pop, const OutcomeCoefficients &oc, Rng &rng) {
    const double sd = std::sqrt(oc.sigma2);
    std::vector<double> alpha(pop.villages.size());
    for (auto &a : alpha) {
        a = sd * rng.normal();
    }
    Followup out;
    out.y1.resize(pop.children.size());
    long vaccinated = 0;
    for (std::size_t i = 0; i < pop.children.size(); ++i) {
        const auto &c = pop.children[i];
        const auto &v = pop.villages[c.village_id];
        const double eta = linear_predictor(oc.effects, v, c) + v.baseline_logodds + alpha[c.village_id];
        const bool y = rng.bernoulli(expit(eta));
        out.y1[i] = y ? 1 : 0;
        vaccinated += y ? 1 : 0;
    }
    out.p_true = pop.children.empty() ? 0.0
                                      : static_cast<double>(vaccinated) / static_cast<double>(pop.children.size());
    return out;
}

std::vector<std::uint8_t> generate_attendance(const Population &pop, const std::vector<std::uint8_t> &y1,
                                              const SelectionCoefficients &sc, Rng &rng) {
    if (y1.size() != pop.children.size()) {
        throw std::invalid_argument("outcome vector does not match the population");
    }
    const double sd = std::sqrt(sc.tau2);
    std::vector<double> mu(pop.villages.size());
    for (auto &m : mu) {
        m = sd * rng.normal();
    }
    const double log_xi = std::log(sc.xi);
    std::vector<std::uint8_t> attended(pop.children.size());
    for (std::size_t i = 0; i < pop.children.size(); ++i) {
        const auto &c = pop.children[i];
        const double eta = linear_predictor(sc.effects, pop.villages[c.village_id], c) + mu[c.village_id] +
                           log_xi * static_cast<double>(y1[i]);
        attended[i] = rng.bernoulli(expit(eta)) ? 1 : 0;
    }
    return attended;
}

Sample draw_sample(const Population &pop, const std::vector<std::uint8_t> &attended, double village_fraction,
                   Rng &rng) {
    if (!(village_fraction > 0.0 && village_fraction <= 1.0)) {
        throw std::invalid_argument(fmt::format("village fraction must be in (0,1], got {}", village_fraction));
    }
    if (attended.size() != pop.children.size()) {
        throw std::invalid_argument("attendance vector does not match the population");
    }
    const std::size_t total = pop.villages.size();
    const auto m = static_cast<std::size_t>(std::llround(village_fraction * static_cast<double>(total)));
    if (m == 0) {
        throw std::invalid_argument("village fraction selects zero villages");
    }
    std::vector<std::size_t> ids(total);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    // Partial Fisher-Yates.
    for (std::size_t k = 0; k < m; ++k) {
        const auto span = static_cast<double>(total - k);
        const auto pick = k + std::min(static_cast<std::size_t>(rng.uniform() * span), total - k - 1);
        std::swap(ids[k], ids[pick]);
    }
    Sample s;
    s.sampled_villages.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(s.sampled_villages.begin(), s.sampled_villages.end());
    for (std::size_t j : s.sampled_villages) {
        const auto &v = pop.villages[j];
        for (int k = 0; k < v.n_children; ++k) {
            const std::size_t i = v.first_child + static_cast<std::size_t>(k);
            if (attended[i]) {
                s.respondents.push_back(i);
            }
        }
    }
    return s;
}

double attendance_rate(const Population &pop, const std::vector<std::uint8_t> &attended, bool child_weighted) {
    if (pop.villages.empty()) {
        return 0.0;
    }
    if (child_weighted) {
        const long n = std::accumulate(attended.begin(), attended.end(), 0L);
        return static_cast<double>(n) / static_cast<double>(attended.size());
    }
    double total = 0.0;
    for (const auto &v : pop.villages) {
        int n = 0;
        for (int k = 0; k < v.n_children; ++k) {
            n += attended[v.first_child + static_cast<std::size_t>(k)];
        }
        total += static_cast<double>(n) / v.n_children;
    }
    return total / static_cast<double>(pop.villages.size());
}

GammaTuning tune_gamma0(const Population &pop, const OutcomeCoefficients &oc, const SelectionCoefficients &sc,
                        double target_rate, const TuningConfig &cfg) {
    if (!(target_rate > 0.0 && target_rate < 1.0)) {
        throw std::invalid_argument("target response rate must lie in (0,1)");
    }
    if (cfg.replicates < 1) {
        throw std::invalid_argument("tuning needs at least one replicate");
    }
    sc.validate();
    const std::size_t n = pop.children.size();
    const auto reps = static_cast<std::size_t>(cfg.replicates);

    // Everything except gamma0 is drawn once: base predictor (slopes, village
    // intercept, xi term) and the uniform driving each Bernoulli.
    const std::vector<double> slopes = slopes_only(pop, sc.effects);
    const double sd = std::sqrt(sc.tau2);
    const double log_xi = std::log(sc.xi);
    std::vector<double> base(reps * n);
    std::vector<double> uniforms(reps * n);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng outcome_rng = Rng::stream(cfg.seed, {0, r, StreamRole::Outcome});
        const Followup f = generate_followup(pop, oc, outcome_rng);
        Rng rng = Rng::stream(cfg.seed, {0, r, StreamRole::Tuning});
        std::vector<double> mu(pop.villages.size());
        for (auto &m : mu) {
            m = sd * rng.normal();
        }
        for (std::size_t i = 0; i < n; ++i) {
            base[r * n + i] = slopes[i] + mu[pop.children[i].village_id] + log_xi * f.y1[i];
            uniforms[r * n + i] = rng.uniform();
        }
    }

    std::vector<std::uint8_t> attended(n);
    auto rate_at = [&](double gamma0) {
        double total = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            for (std::size_t i = 0; i < n; ++i) {
                attended[i] = uniforms[r * n + i] < expit(gamma0 + base[r * n + i]) ? 1 : 0;
            }
            total += attendance_rate(pop, attended, cfg.child_weighted_rate);
        }
        return total / static_cast<double>(reps);
    };
    const auto result = bisect_increasing(rate_at, target_rate, cfg.gamma_lo, cfg.gamma_hi, cfg.tolerance,
                                          cfg.max_iterations, fmt::format("gamma0 (xi={})", sc.xi));
    return {result.root, result.value, result.iterations};
}

} // namespace anchorsim
