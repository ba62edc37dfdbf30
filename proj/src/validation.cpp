#include "anchorsim/validation.hpp"

#include "anchorsim/calibration.hpp"
#include "anchorsim/dgm.hpp"
#include "anchorsim/estimators.hpp"
#include "anchorsim/imputation.hpp"
#include "anchorsim/logistic.hpp"
#include "anchorsim/numeric.hpp"
#include "anchorsim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace anchorsim {

namespace {

struct CalibrationInstance {
    Eigen::VectorXd d;
    Eigen::MatrixXd x;
    Eigen::VectorXd totals;
    std::vector<Auxiliary> columns;
};

CalibrationInstance random_calibration_instance(Rng &rng) {
    CalibrationInstance inst;
    const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng.uniform() * 60.0);
    inst.columns = {Auxiliary::Intercept, Auxiliary::ChildAge, Auxiliary::ChildMale, Auxiliary::Distance};
    inst.d.resize(n);
    inst.x.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        inst.d(i) = 1.0 + 9.0 * rng.uniform();
        inst.x(i, 0) = 1.0;
        inst.x(i, 1) = 12.0 + std::floor(13.0 * rng.uniform());
        inst.x(i, 2) = rng.bernoulli(0.46) ? 1.0 : 0.0;
        inst.x(i, 3) = 10.0 * rng.uniform();
    }
    const Eigen::VectorXd base = inst.x.transpose() * inst.d;
    inst.totals = base;
    for (Eigen::Index k = 0; k < inst.totals.size(); ++k) {
        inst.totals(k) *= 1.0 + 0.1 * (2.0 * rng.uniform() - 1.0);
    }
    return inst;
}

SurveySample full_census_sample(const Population &pop, const AuxiliaryMatrix &aux, const std::vector<std::uint8_t> &y) {
    const std::vector<std::uint8_t> everyone(pop.children.size(), 1);
    Rng rng(1);
    const Sample sample = draw_sample(pop, everyone, 1.0, rng);
    return make_survey_sample(pop, aux, sample, y);
}

std::pair<Population, std::vector<std::uint8_t>> identity_population(std::uint64_t seed) {
    PopulationConfig cfg;
    cfg.n_villages = 60;
    cfg.rng_seed = seed;
    const OutcomeCoefficients oc;
    Population pop = build_census(cfg, oc);
    const OutcomeCoefficients tuned = tune_followup_intercept(pop, oc);
    Rng rng = Rng::stream(seed, {0, 0, StreamRole::Outcome});
    Followup f = generate_followup(pop, tuned, rng);
    return {std::move(pop), std::move(f.y1)};
}

CheckResult make(std::string name, bool passed, std::string detail) {
    return {std::move(name), passed, std::move(detail)};
}

} // namespace

CheckResult check_calibration_constraints(const ValidationOptions &options) {
    Rng rng = Rng::stream(options.seed, {2, 0, StreamRole::Oracle});
    double worst = 0.0;
    for (std::size_t k = 0; k < options.randomized_instances; ++k) {
        const auto inst = random_calibration_instance(rng);
        const auto cal = calibrate_weights(inst.d, inst.x, inst.totals, inst.columns);
        worst = std::max(worst, cal.relative_residual);
    }
    return make("calibration constraints", worst < 1e-8,
                fmt::format("max relative residual {:.3e} over {} instances (limit 1e-8)", worst,
                            options.randomized_instances));
}

CheckResult check_calibration_kkt(const ValidationOptions &options) {
    Rng rng = Rng::stream(options.seed, {3, 0, StreamRole::Oracle});
    double worst = 0.0;
    for (std::size_t k = 0; k < options.randomized_instances; ++k) {
        const auto inst = random_calibration_instance(rng);
        const auto cal = calibrate_weights(inst.d, inst.x, inst.totals, inst.columns);
        const Eigen::VectorXd w = oracle::kkt_calibration(inst.d, inst.x, inst.totals);
        worst = std::max(worst, (cal.w - w).cwiseAbs().maxCoeff());
    }
    return make("calibration vs KKT oracle", worst < 1e-8,
                fmt::format("max |w - w_kkt| {:.3e} over {} instances (limit 1e-8)", worst,
                            options.randomized_instances));
}

CheckResult check_logistic_newton(const ValidationOptions &options) {
    Rng rng = Rng::stream(options.seed, {4, 0, StreamRole::Oracle});
    double worst = 0.0;
    for (std::size_t k = 0; k < options.randomized_instances; ++k) {
        const Eigen::Index n = 150 + static_cast<Eigen::Index>(rng.uniform() * 150.0);
        Eigen::MatrixXd x(n, 4);
        Eigen::VectorXd y(n);
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
        std::vector<double> yv(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = rng.normal();
            x(i, 2) = rng.bernoulli(0.4) ? 1.0 : 0.0;
            x(i, 3) = 12.0 + std::floor(13.0 * rng.uniform());
            const double eta = 0.3 + 0.8 * x(i, 1) - 0.5 * x(i, 2) + 0.05 * (x(i, 3) - 18.0);
            y(i) = rng.bernoulli(expit(eta)) ? 1.0 : 0.0;
            rows[static_cast<std::size_t>(i)] = {x(i, 0), x(i, 1), x(i, 2), x(i, 3)};
            yv[static_cast<std::size_t>(i)] = y(i);
        }
        const auto fit = fit_logistic(x, y);
        const auto reference = oracle::newton_logistic(rows, yv);
        for (std::size_t c = 0; c < reference.size(); ++c) {
            worst = std::max(worst, std::abs(fit.beta(static_cast<Eigen::Index>(c)) - reference[c]));
        }
    }
    return make("logistic IRLS vs Newton oracle", worst < 1e-6,
                fmt::format("max |beta - beta_newton| {:.3e} over {} datasets (limit 1e-6)", worst,
                            options.randomized_instances));
}

CheckResult check_delta_gradient(const ValidationOptions &options) {
    Rng rng = Rng::stream(options.seed, {5, 0, StreamRole::Oracle});
    double worst = 0.0;
    for (std::size_t k = 0; k < options.randomized_instances; ++k) {
        const Eigen::Index n = 300;
        Eigen::MatrixXd x(n, 4);
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = rng.normal();
            x(i, 2) = rng.bernoulli(0.5) ? 1.0 : 0.0;
            x(i, 3) = 12.0 + std::floor(13.0 * rng.uniform());
        }
        Eigen::VectorXd beta(4);
        beta << rng.normal(), 0.5 * rng.normal(), 0.5 * rng.normal(), 0.05 * rng.normal();
        const Eigen::VectorXd analytic = imputation_gradient(beta, x);
        const auto fd = oracle::imputation_gradient_fd(std::vector<double>(beta.data(), beta.data() + beta.size()), x);
        double scale = 0.0;
        for (double g : fd) {
            scale = std::max(scale, std::abs(g));
        }
        for (std::size_t c = 0; c < fd.size(); ++c) {
            const double denom = std::max(std::abs(fd[c]), 1e-3 * scale);
            worst = std::max(worst, std::abs(analytic(static_cast<Eigen::Index>(c)) - fd[c]) / denom);
        }
    }
    return make("delta-method gradient vs finite differences", worst < 1e-4,
                fmt::format("max relative error {:.3e} (limit 1e-4)", worst));
}

CheckResult check_census_identity_calibrated(const ValidationOptions &options) {
    const auto [pop, y] = identity_population(options.seed);
    const auto aux = AuxiliaryMatrix::from_population(pop);
    const SurveySample sample = full_census_sample(pop, aux, y);
    EstimatorOptions opts;
    opts.sandwich.factor_override = options.sandwich_factor_override;
    const auto est = estimate_calibrated(sample, aux, opts);
    const double truth = sample.y.mean();
    const double gap = std::abs(est.p_hat - truth);
    return make("census identity (calibrated)", gap < 1e-12,
                fmt::format("|p_hat - p_true| = {:.3e} (limit 1e-12)", gap));
}

CheckResult check_census_identity_imputation(const ValidationOptions &options) {
    const auto [pop, y] = identity_population(options.seed);
    const auto aux = AuxiliaryMatrix::from_population(pop);
    const SurveySample sample = full_census_sample(pop, aux, y);
    EstimatorOptions opts;
    opts.sandwich.factor_override = options.sandwich_factor_override;
    const auto est = estimate_imputation(sample, aux, opts);
    const double truth = sample.y.mean();
    const double gap = std::abs(est.p_hat - truth);
    return make("census identity (logistic imputation)", gap < 1e-10,
                fmt::format("|p_hat - p_true| = {:.3e} (limit 1e-10)", gap));
}

namespace {

CheckResult variance_oracle(const ValidationOptions &options, Method method, double tolerance, const char *name) {
    const auto design = oracle::make_toy_design(600, 6, 0.8, options.seed);
    EstimatorOptions opts;
    opts.sandwich.factor_override = options.sandwich_factor_override;
    const auto mc = oracle::monte_carlo_variance(design, method, options.monte_carlo_redraws, options.seed, opts);
    const double ratio = mc.ratio();
    return make(name, std::abs(ratio - 1.0) <= tolerance,
                fmt::format("mean se^2 {:.4e} vs Monte Carlo variance {:.4e} over {} redraws: ratio {:.3f} "
                            "(band ±{:.0f}%)",
                            mc.mean_estimated_variance, mc.empirical_variance, options.monte_carlo_redraws, ratio,
                            100 * tolerance));
}

} // namespace

CheckResult check_calibration_variance_oracle(const ValidationOptions &options) {
    return variance_oracle(options, Method::Calibrated, kCalibrationVarianceTolerance,
                           "calibration variance vs Monte Carlo");
}

CheckResult check_imputation_variance_oracle(const ValidationOptions &options) {
    return variance_oracle(options, Method::LogisticImputation, kImputationVarianceTolerance,
                           "imputation variance vs Monte Carlo");
}

CheckResult check_icc_roundtrip(const ValidationOptions &options) {
    Rng rng = Rng::stream(options.seed, {6, 0, StreamRole::Oracle});
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double icc = 1e-6 + (1.0 - 2e-6) * rng.uniform();
        worst = std::max(worst, std::abs(variance_to_icc(icc_to_variance(icc)) - icc));
    }
    return make("ICC inversion", worst < 1e-12, fmt::format("max roundtrip error {:.3e} (limit 1e-12)", worst));
}

std::vector<CheckResult> run_validation_suite(const ValidationOptions &options) {
    using Check = CheckResult (*)(const ValidationOptions &);
    const Check checks[] = {check_icc_roundtrip,
                            check_calibration_constraints,
                            check_calibration_kkt,
                            check_logistic_newton,
                            check_delta_gradient,
                            check_census_identity_calibrated,
                            check_census_identity_imputation,
                            check_calibration_variance_oracle,
                            check_imputation_variance_oracle};
    std::vector<CheckResult> results;
    for (Check check : checks) {
        CheckResult r;
        try {
            r = check(options);
        } catch (const std::exception &e) {
            r.passed = false;
            r.detail = fmt::format("threw: {}", e.what());
            r.name = "check";
        }
        if (options.on_check) {
            options.on_check(r);
        }
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace anchorsim
