#include "anchorsim/config.hpp"

#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <set>

namespace anchorsim {

using nlohmann::json;

namespace {

json effects_json(const FixedEffects &e) {
    return {{"intercept", e.intercept},       {"population", e.population}, {"distance", e.distance},
            {"child_age", e.child_age},       {"guardian_age", e.guardian_age},
            {"child_male", e.child_male},     {"guardian_male", e.guardian_male}};
}

void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where) {
    if (!j.is_object()) {
        throw ConfigError(fmt::format("'{}' must be an object", where));
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto &item : j.items()) {
        if (!keys.contains(item.key())) {
            throw ConfigError(fmt::format("unknown key '{}' in '{}'", item.key(), where));
        }
    }
}

template <typename T>
void read(const json &j, const char *key, T &target) {
    if (j.contains(key)) {
        target = j.at(key).get<T>();
    }
}

FixedEffects effects_from(const json &j, FixedEffects e, const std::string &where) {
    check_keys(j,
               {"intercept", "population", "distance", "child_age", "guardian_age", "child_male", "guardian_male"},
               where);
    read(j, "intercept", e.intercept);
    read(j, "population", e.population);
    read(j, "distance", e.distance);
    read(j, "child_age", e.child_age);
    read(j, "guardian_age", e.guardian_age);
    read(j, "child_male", e.child_male);
    read(j, "guardian_male", e.guardian_male);
    return e;
}

std::string fnv1a(const std::string &text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

} // namespace

void RunConfig::validate() const {
    try {
        population.validate();
        outcome.validate();
        selection.validate();
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }
    auto nonempty = [](const std::vector<double> &v, const char *name) {
        if (v.empty()) {
            throw ConfigError(fmt::format("grid.{} must not be empty", name));
        }
    };
    nonempty(grid.village_fractions, "village_fractions");
    nonempty(grid.response_rates, "response_rates");
    nonempty(grid.xis, "xis");
    for (double f : grid.village_fractions) {
        if (!(f > 0.0 && f <= 1.0)) {
            throw ConfigError(fmt::format("village fraction {} outside (0,1]", f));
        }
        if (std::llround(f * population.n_villages) < 1) {
            throw ConfigError(fmt::format("village fraction {} samples zero villages", f));
        }
    }
    for (double r : grid.response_rates) {
        if (!(r > 0.0 && r < 1.0)) {
            throw ConfigError(fmt::format("response rate {} outside (0,1)", r));
        }
    }
    for (double x : grid.xis) {
        if (!(x > 0.0)) {
            throw ConfigError(fmt::format("odds ratio {} must be positive", x));
        }
    }
    if (n_rep < 1) {
        throw ConfigError("n_rep must be >= 1");
    }
    if (workers < 0) {
        throw ConfigError("workers must be >= 0");
    }
    if (tuning.replicates < 1 || tuning.max_iterations < 1 || !(tuning.tolerance > 0.0) ||
        !(tuning.gamma_lo < tuning.gamma_hi)) {
        throw ConfigError("invalid tuning settings");
    }
}

json to_json(const RunConfig &cfg) {
    const auto &p = cfg.population;
    json j;
    j["population"] = {{"n_villages", p.n_villages},
                       {"min_children_per_village", p.min_children_per_village},
                       {"mean_children_per_village", p.mean_children_per_village},
                       {"village_size_dispersion", p.village_size_dispersion},
                       {"child_share_of_population", p.child_share_of_population},
                       {"population_noise_sd", p.population_noise_sd},
                       {"distance_mean_km", p.distance_mean_km},
                       {"distance_max_km", p.distance_max_km},
                       {"child_age_range_months", {p.child_age_min_months, p.child_age_max_months}},
                       {"child_male_prob", p.child_male_prob},
                       {"guardian_male_prob", p.guardian_male_prob},
                       {"guardian_age_mean_yr", p.guardian_age_mean_yr},
                       {"guardian_age_sd_yr", p.guardian_age_sd_yr},
                       {"guardian_age_range_yr", {p.guardian_age_min_yr, p.guardian_age_max_yr}},
                       {"baseline_target_rate", p.baseline_target_rate},
                       {"icc_vaccination", p.icc_vaccination},
                       {"icc_selection", p.icc_selection},
                       {"rng_seed", p.rng_seed}};
    j["outcome"] = {{"effects", effects_json(cfg.outcome.effects)},
                    {"sigma2", cfg.outcome.sigma2},
                    {"followup_target_rate", cfg.outcome.followup_target_rate}};
    j["selection"] = {{"effects", effects_json(cfg.selection.effects)}, {"tau2", cfg.selection.tau2}};
    j["grid"] = {{"village_fractions", cfg.grid.village_fractions},
                 {"response_rates", cfg.grid.response_rates},
                 {"xis", cfg.grid.xis}};
    j["tuning"] = {{"replicates", cfg.tuning.replicates},
                   {"tolerance", cfg.tuning.tolerance},
                   {"gamma_bracket", {cfg.tuning.gamma_lo, cfg.tuning.gamma_hi}},
                   {"max_iterations", cfg.tuning.max_iterations},
                   {"child_weighted_rate", cfg.tuning.child_weighted_rate},
                   {"seed", cfg.tuning.seed}};
    j["estimators"] = {
        {"calibration_divisor", cfg.estimators.calibration_divisor == VarianceDivisor::Estimated ? "estimated" : "known"},
        {"condition_limit", cfg.estimators.condition_limit},
        {"sandwich_small_sample_correction", cfg.estimators.sandwich.small_sample_correction},
        {"logistic_max_iterations", cfg.estimators.logistic.max_iterations},
        {"logistic_deviance_tolerance", cfg.estimators.logistic.deviance_tolerance}};
    j["n_rep"] = cfg.n_rep;
    j["master_seed"] = cfg.master_seed;
    j["workers"] = cfg.workers;
    j["output_dir"] = cfg.output_dir;
    j["population_redraw_per_replicate"] = cfg.population_redraw_per_replicate;
    return j;
}

RunConfig run_config_from_json(const json &j) {
    RunConfig cfg;
    try {
        check_keys(j,
                   {"population", "outcome", "selection", "grid", "tuning", "estimators", "n_rep", "master_seed",
                    "workers", "output_dir", "population_redraw_per_replicate"},
                   "config");
        bool sigma2_given = false;
        bool tau2_given = false;
        if (j.contains("population")) {
            const auto &p = j.at("population");
            check_keys(p,
                       {"n_villages", "min_children_per_village", "mean_children_per_village",
                        "village_size_dispersion", "child_share_of_population", "population_noise_sd",
                        "distance_mean_km", "distance_max_km", "child_age_range_months", "child_male_prob",
                        "guardian_male_prob", "guardian_age_mean_yr", "guardian_age_sd_yr", "guardian_age_range_yr",
                        "baseline_target_rate", "icc_vaccination", "icc_selection", "rng_seed"},
                       "population");
            auto &pc = cfg.population;
            read(p, "n_villages", pc.n_villages);
            read(p, "min_children_per_village", pc.min_children_per_village);
            read(p, "mean_children_per_village", pc.mean_children_per_village);
            read(p, "village_size_dispersion", pc.village_size_dispersion);
            read(p, "child_share_of_population", pc.child_share_of_population);
            read(p, "population_noise_sd", pc.population_noise_sd);
            read(p, "distance_mean_km", pc.distance_mean_km);
            read(p, "distance_max_km", pc.distance_max_km);
            if (p.contains("child_age_range_months")) {
                const auto range = p.at("child_age_range_months").get<std::vector<int>>();
                if (range.size() != 2) {
                    throw ConfigError("child_age_range_months needs two values");
                }
                pc.child_age_min_months = range[0];
                pc.child_age_max_months = range[1];
            }
            read(p, "child_male_prob", pc.child_male_prob);
            read(p, "guardian_male_prob", pc.guardian_male_prob);
            read(p, "guardian_age_mean_yr", pc.guardian_age_mean_yr);
            read(p, "guardian_age_sd_yr", pc.guardian_age_sd_yr);
            if (p.contains("guardian_age_range_yr")) {
                const auto range = p.at("guardian_age_range_yr").get<std::vector<double>>();
                if (range.size() != 2) {
                    throw ConfigError("guardian_age_range_yr needs two values");
                }
                pc.guardian_age_min_yr = range[0];
                pc.guardian_age_max_yr = range[1];
            }
            read(p, "baseline_target_rate", pc.baseline_target_rate);
            read(p, "icc_vaccination", pc.icc_vaccination);
            read(p, "icc_selection", pc.icc_selection);
            read(p, "rng_seed", pc.rng_seed);
        }
        if (j.contains("outcome")) {
            const auto &o = j.at("outcome");
            check_keys(o, {"effects", "sigma2", "followup_target_rate"}, "outcome");
            if (o.contains("effects")) {
                cfg.outcome.effects = effects_from(o.at("effects"), cfg.outcome.effects, "outcome.effects");
            }
            sigma2_given = o.contains("sigma2");
            read(o, "sigma2", cfg.outcome.sigma2);
            read(o, "followup_target_rate", cfg.outcome.followup_target_rate);
        }
        if (j.contains("selection")) {
            const auto &s = j.at("selection");
            check_keys(s, {"effects", "tau2"}, "selection");
            if (s.contains("effects")) {
                cfg.selection.effects = effects_from(s.at("effects"), cfg.selection.effects, "selection.effects");
            }
            tau2_given = s.contains("tau2");
            read(s, "tau2", cfg.selection.tau2);
        }
        if (j.contains("grid")) {
            const auto &g = j.at("grid");
            check_keys(g, {"village_fractions", "response_rates", "xis"}, "grid");
            read(g, "village_fractions", cfg.grid.village_fractions);
            read(g, "response_rates", cfg.grid.response_rates);
            read(g, "xis", cfg.grid.xis);
        }
        if (j.contains("tuning")) {
            const auto &t = j.at("tuning");
            check_keys(t, {"replicates", "tolerance", "gamma_bracket", "max_iterations", "child_weighted_rate", "seed"},
                       "tuning");
            read(t, "replicates", cfg.tuning.replicates);
            read(t, "tolerance", cfg.tuning.tolerance);
            if (t.contains("gamma_bracket")) {
                const auto b = t.at("gamma_bracket").get<std::vector<double>>();
                if (b.size() != 2) {
                    throw ConfigError("gamma_bracket needs two values");
                }
                cfg.tuning.gamma_lo = b[0];
                cfg.tuning.gamma_hi = b[1];
            }
            read(t, "max_iterations", cfg.tuning.max_iterations);
            read(t, "child_weighted_rate", cfg.tuning.child_weighted_rate);
            read(t, "seed", cfg.tuning.seed);
        }
        if (j.contains("estimators")) {
            const auto &e = j.at("estimators");
            check_keys(e,
                       {"calibration_divisor", "condition_limit", "sandwich_small_sample_correction",
                        "logistic_max_iterations", "logistic_deviance_tolerance"},
                       "estimators");
            if (e.contains("calibration_divisor")) {
                const auto d = e.at("calibration_divisor").get<std::string>();
                if (d == "estimated") {
                    cfg.estimators.calibration_divisor = VarianceDivisor::Estimated;
                } else if (d == "known") {
                    cfg.estimators.calibration_divisor = VarianceDivisor::Known;
                } else {
                    throw ConfigError(fmt::format("calibration_divisor must be 'estimated' or 'known', got '{}'", d));
                }
            }
            read(e, "condition_limit", cfg.estimators.condition_limit);
            read(e, "sandwich_small_sample_correction", cfg.estimators.sandwich.small_sample_correction);
            read(e, "logistic_max_iterations", cfg.estimators.logistic.max_iterations);
            read(e, "logistic_deviance_tolerance", cfg.estimators.logistic.deviance_tolerance);
        }
        read(j, "n_rep", cfg.n_rep);
        read(j, "master_seed", cfg.master_seed);
        read(j, "workers", cfg.workers);
        read(j, "output_dir", cfg.output_dir);
        read(j, "population_redraw_per_replicate", cfg.population_redraw_per_replicate);

        if (!sigma2_given) {
            cfg.outcome.sigma2 = icc_to_variance(cfg.population.icc_vaccination);
        }
        if (!tau2_given) {
            cfg.selection.tau2 = icc_to_variance(cfg.population.icc_selection);
        }
    } catch (const ConfigError &) {
        throw;
    } catch (const std::exception &e) {
        throw ConfigError(fmt::format("invalid config: {}", e.what()));
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
        throw ConfigError(fmt::format("cannot parse '{}': {}", path.string(), e.what()));
    }
    return run_config_from_json(j);
}

void save_run_config(const RunConfig &cfg, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << to_json(cfg).dump(2) << '\n';
}

void apply_environment_overrides(RunConfig &cfg) {
    if (const char *seed = std::getenv("ANCHORSIM_SEED"); seed != nullptr && *seed != '\0') {
        try {
            cfg.master_seed = std::stoull(seed);
        } catch (const std::exception &) {
            throw ConfigError(fmt::format("ANCHORSIM_SEED is not an unsigned integer: '{}'", seed));
        }
    }
    if (const char *workers = std::getenv("ANCHORSIM_WORKERS"); workers != nullptr && *workers != '\0') {
        try {
            cfg.workers = std::stoi(workers);
        } catch (const std::exception &) {
            throw ConfigError(fmt::format("ANCHORSIM_WORKERS is not an integer: '{}'", workers));
        }
    }
}

std::string config_hash(const RunConfig &cfg) {
    json j = to_json(cfg);
    j.erase("workers");
    j.erase("output_dir");
    return fnv1a(j.dump());
}

std::string tuning_hash(const RunConfig &cfg) {
    const json full = to_json(cfg);
    json j;
    j["population"] = full["population"];
    j["outcome"] = full["outcome"];
    j["selection"] = full["selection"];
    j["tuning"] = full["tuning"];
    return fnv1a(j.dump());
}

} // namespace anchorsim
