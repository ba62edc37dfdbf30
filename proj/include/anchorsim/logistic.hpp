#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace anchorsim {

struct LogisticOptions {
    int max_iterations = 50;
    double deviance_tolerance = 1e-8;
    double separation_bound = 15.0;
};

struct LogisticFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd fitted; ///< expit(X beta) on the fitting rows
    Eigen::MatrixXd bread;  ///< (X' W X)^-1 at beta
    double deviance = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. Throws EstimationError on a single-class outcome, too few rows,
/// a singular information matrix, or complete separation.
LogisticFit fit_logistic(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const LogisticOptions &opts = {});

struct SandwichOptions {
    /// Multiply by g / (g - 1) for g clusters.
    bool small_sample_correction = true;
    /// Replaces the correction factor when set (fault injection in validation).
    std::optional<double> factor_override;
};

/// Cluster-robust covariance c * B (sum_g u_g u_g') B with u_g the score sum of
/// cluster g. `clusters[i]` labels row i. Throws EstimationError with fewer than
/// two clusters.
Eigen::MatrixXd cluster_sandwich(const LogisticFit &fit, const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                                 const std::vector<std::size_t> &clusters, const SandwichOptions &opts = {});

} // namespace anchorsim
