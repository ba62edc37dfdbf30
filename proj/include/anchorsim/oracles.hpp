#pragma once

// Reference computations that deliberately avoid the estimator code paths.
// Tests and the validate subcommand compare the estimators against these.

#include "anchorsim/design.hpp"
#include "anchorsim/estimators.hpp"
#include "anchorsim/random.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace anchorsim::oracle {

/// Minimizes sum (w - d)^2 / (2 d) subject to x'w = t by solving the full
/// (n + p) KKT system with a pivoted LU.
Eigen::VectorXd kkt_calibration(const Eigen::VectorXd &d, const Eigen::MatrixXd &x, const Eigen::VectorXd &t);

/// Textbook Newton-Raphson for logistic regression on plain vectors, with
/// Gaussian elimination (partial pivoting) for each step.
std::vector<double> newton_logistic(const std::vector<std::vector<double>> &rows, const std::vector<double> &y,
                                    int max_iterations = 100, double tolerance = 1e-12);

/// Central differences of beta -> mean over rows of 1 / (1 + exp(-x'beta)).
std::vector<double> imputation_gradient_fd(const std::vector<double> &beta, const Eigen::MatrixXd &census_x,
                                           double h = 1e-5);

/// Fixed finite population with known outcomes for design-based Monte Carlo checks.
struct ToyDesign {
    Population population;
    std::vector<std::uint8_t> y;
    AuxiliaryMatrix aux;          ///< intercept and child age
    std::size_t sampled_villages; ///< m
    double within_fraction;       ///< share of each sampled village observed (SRS)
    double p_true = 0.0;
};

/// `n_villages` villages of 8-16 children, outcomes from a logistic model with
/// a village effect and an age slope.
ToyDesign make_toy_design(std::size_t n_villages, std::size_t sampled_villages, double within_fraction,
                          std::uint64_t seed);

/// SRS of villages, then SRS of ceil(within_fraction * V_j) children in each.
SurveySample draw_toy_sample(const ToyDesign &design, Rng &rng);

struct MonteCarloVariance {
    double empirical_variance = 0.0;     ///< variance of p_hat over redraws
    double mean_estimated_variance = 0.0; ///< mean of se^2 over redraws
    double mean_p_hat = 0.0;
    std::size_t failures = 0;

    double ratio() const noexcept { return mean_estimated_variance / empirical_variance; }
};

MonteCarloVariance monte_carlo_variance(const ToyDesign &design, Method method, std::size_t redraws,
                                        std::uint64_t seed, const EstimatorOptions &options = {});

} // namespace anchorsim::oracle
