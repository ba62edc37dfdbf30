#pragma once

#include "anchorsim/calibration.hpp"
#include "anchorsim/design.hpp"
#include "anchorsim/estimate.hpp"
#include "anchorsim/logistic.hpp"

namespace anchorsim {

struct EstimatorOptions {
    VarianceDivisor calibration_divisor = VarianceDivisor::Estimated;
    double condition_limit = kConditionLimit;
    LogisticOptions logistic;
    SandwichOptions sandwich;
};

/// Calibrated Horvitz-Thompson proportion with its two-stage linearized SE.
/// `aux` supplies the census totals; its columns must match sample.x.
EstimateResult estimate_calibrated(const SurveySample &sample, const AuxiliaryMatrix &aux,
                                   const EstimatorOptions &opts = {});

/// Logistic mass imputation over the census with a cluster-robust delta-method SE.
EstimateResult estimate_imputation(const SurveySample &sample, const AuxiliaryMatrix &aux,
                                   const EstimatorOptions &opts = {});

} // namespace anchorsim
