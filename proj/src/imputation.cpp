#include "anchorsim/imputation.hpp"

#include "anchorsim/numeric.hpp"

#include <cmath>
#include <stdexcept>

namespace anchorsim {

double imputation_estimate(const Eigen::VectorXd &beta, const Eigen::MatrixXd &census_x) {
    if (census_x.rows() == 0) {
        throw std::invalid_argument("empty census");
    }
    const Eigen::VectorXd eta = census_x * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        total += expit(eta(i));
    }
    return total / static_cast<double>(census_x.rows());
}

Eigen::VectorXd imputation_gradient(const Eigen::VectorXd &beta, const Eigen::MatrixXd &census_x) {
    if (census_x.rows() == 0) {
        throw std::invalid_argument("empty census");
    }
    const Eigen::VectorXd eta = census_x * beta;
    const Eigen::VectorXd slope = eta.unaryExpr([](double t) {
        const double p = expit(t);
        return p * (1.0 - p);
    });
    return census_x.transpose() * slope / static_cast<double>(census_x.rows());
}

ImputationVariance imputation_variance(const Eigen::VectorXd &gradient, const Eigen::MatrixXd &cov) {
    const double q = gradient.dot(cov * gradient);
    ImputationVariance out;
    if (q < 0.0) {
        out.clamped = true;
        return out;
    }
    out.se = std::sqrt(q);
    return out;
}

} // namespace anchorsim
