#pragma once

#include <Eigen/Dense>

namespace anchorsim {

/// (1/N) sum over the census of expit(x_i' beta).
double imputation_estimate(const Eigen::VectorXd &beta, const Eigen::MatrixXd &census_x);

/// (1/N) sum over the census of p_i (1 - p_i) x_i.
Eigen::VectorXd imputation_gradient(const Eigen::VectorXd &beta, const Eigen::MatrixXd &census_x);

struct ImputationVariance {
    double se = 0.0;
    bool clamped = false; ///< quadratic form was negative and set to zero
};

/// Delta-method standard error sqrt(grad' cov grad).
ImputationVariance imputation_variance(const Eigen::VectorXd &gradient, const Eigen::MatrixXd &cov);

} // namespace anchorsim
