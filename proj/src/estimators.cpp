#include "anchorsim/estimators.hpp"

#include "anchorsim/imputation.hpp"

#include <fmt/format.h>

namespace anchorsim {

namespace {

void require_respondents(const SurveySample &sample) {
    if (sample.n_respondents() == 0) {
        throw EstimationError("empty sample");
    }
}

EstimateResult finish(Method method, double p_hat, double se, const SurveySample &sample) {
    EstimateResult out;
    out.method = method;
    out.p_hat = p_hat;
    out.se = se;
    std::tie(out.ci95, out.ci90) = wald_intervals(p_hat, se);
    out.diagnostics.n_respondents = sample.n_respondents();
    out.diagnostics.m_villages = sample.m_villages();
    return out;
}

} // namespace

EstimateResult estimate_calibrated(const SurveySample &sample, const AuxiliaryMatrix &aux,
                                   const EstimatorOptions &opts) {
    require_respondents(sample);
    if (sample.x.cols() != static_cast<Eigen::Index>(aux.columns.size())) {
        throw std::invalid_argument("sample auxiliaries do not match the census columns");
    }
    const DesignWeights dw = compute_design_weights(sample);
    const CalibrationResult cal = calibrate_weights(dw.d, sample.x, aux.totals, aux.columns, opts.condition_limit);
    const double n = static_cast<double>(aux.x.rows());
    const double p_hat = ht_proportion(cal.w, sample.y, n);

    Eigen::MatrixXd x_active(sample.x.rows(), static_cast<Eigen::Index>(cal.columns.size()));
    for (std::size_t k = 0; k < cal.columns.size(); ++k) {
        x_active.col(static_cast<Eigen::Index>(k)) = sample.x.col(aux.column_of(cal.columns[k]));
    }
    const CalibrationVariance var =
        calibration_variance(sample, dw, x_active, sample.y, n, opts.calibration_divisor);

    EstimateResult out = finish(Method::Calibrated, p_hat, var.se, sample);
    out.diagnostics.dropped_auxiliaries = cal.dropped.size();
    return out;
}

EstimateResult estimate_imputation(const SurveySample &sample, const AuxiliaryMatrix &aux,
                                   const EstimatorOptions &opts) {
    require_respondents(sample);
    if (sample.x.cols() != aux.x.cols()) {
        throw std::invalid_argument("sample auxiliaries do not match the census columns");
    }
    const LogisticFit fit = fit_logistic(sample.x, sample.y, opts.logistic);
    const Eigen::MatrixXd cov = cluster_sandwich(fit, sample.x, sample.y, sample.psu, opts.sandwich);
    const double p_hat = imputation_estimate(fit.beta, aux.x);
    const ImputationVariance var = imputation_variance(imputation_gradient(fit.beta, aux.x), cov);

    EstimateResult out = finish(Method::LogisticImputation, p_hat, var.se, sample);
    out.diagnostics.iterations = fit.iterations;
    out.diagnostics.converged = fit.converged;
    out.diagnostics.variance_clamped = var.clamped;
    return out;
}

} // namespace anchorsim
