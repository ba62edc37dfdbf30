#pragma once

#include "anchorsim/design.hpp"
#include "anchorsim/estimate.hpp"

#include <Eigen/Dense>
#include <vector>

namespace anchorsim {

struct CalibrationResult {
    Eigen::VectorXd w;
    Eigen::VectorXd lambda;
    std::vector<Auxiliary> columns; ///< auxiliaries actually calibrated on
    std::vector<Auxiliary> dropped;
    double condition_number = 0.0;
    /// max_k |sum w x_k - t_k| / max_k |t_k|
    double relative_residual = 0.0;
};

inline constexpr double kConditionLimit = 1e12;

/// Chi-square distance calibration: w = d (1 + x'lambda) with
/// (sum d x x') lambda = t - sum d x. Auxiliaries are dropped in kDropOrder
/// while the equilibrated cross-product has condition number above `condition_limit`.
/// `x` holds one column per entry of `columns`.
CalibrationResult calibrate_weights(const Eigen::VectorXd &d, const Eigen::MatrixXd &x,
                                    const Eigen::VectorXd &totals, const std::vector<Auxiliary> &columns,
                                    double condition_limit = kConditionLimit);

/// Condition number of D^-1/2 A D^-1/2 with D = diag(A); infinite when singular.
double equilibrated_condition(const Eigen::MatrixXd &a);

/// (1/N) sum w y.
double ht_proportion(const Eigen::VectorXd &w, const Eigen::VectorXd &y, double population_size);

enum class VarianceDivisor {
    Estimated, ///< N-hat = sum over sampled villages of V_j / pi_j
    Known,     ///< census N
};

struct CalibrationVariance {
    double between = 0.0; ///< between-village component of the total's variance
    double within = 0.0;  ///< within-village component
    double divisor = 0.0;
    double se = 0.0;
};

/// Two-stage linearized variance without finite-population corrections, from
/// GREG residuals of y on the calibration auxiliaries with weights d.
/// `x` holds the calibrated columns only. Throws EstimationError when m < 2.
CalibrationVariance calibration_variance(const SurveySample &sample, const DesignWeights &dw,
                                         const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                                         double population_size, VarianceDivisor divisor);

} // namespace anchorsim
