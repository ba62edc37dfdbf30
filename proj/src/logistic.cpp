#include "anchorsim/logistic.hpp"

#include "anchorsim/estimate.hpp"
#include "anchorsim/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <unordered_map>

namespace anchorsim {

namespace {

double binomial_deviance(const Eigen::VectorXd &y, const Eigen::VectorXd &p) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double pi = std::clamp(p(i), 1e-300, 1.0 - 1e-16);
        dev -= 2.0 * (y(i) > 0.5 ? std::log(pi) : std::log1p(-pi));
    }
    return dev;
}

Eigen::VectorXd predict(const Eigen::MatrixXd &x, const Eigen::VectorXd &beta) {
    Eigen::VectorXd eta = x * beta;
    return eta.unaryExpr([](double t) { return expit(t); });
}

Eigen::MatrixXd information(const Eigen::MatrixXd &x, const Eigen::VectorXd &p) {
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).sqrt();
    const Eigen::MatrixXd xw = x.array().colwise() * w.array();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    info.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    return info.selfadjointView<Eigen::Lower>();
}

} // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const LogisticOptions &opts) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n == 0) {
        throw EstimationError("empty sample");
    }
    if (y.size() != n) {
        throw std::invalid_argument("design matrix and outcome differ in length");
    }
    if (n < p + 1) {
        throw EstimationError(fmt::format("too few respondents ({}) for {} coefficients", n, p));
    }
    const double ones = y.sum();
    if (ones <= 0.0 || ones >= static_cast<double>(n)) {
        throw EstimationError("single-class outcome");
    }

    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd prob = predict(x, fit.beta);
    double deviance = binomial_deviance(y, prob);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::MatrixXd info = information(x, prob);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
            throw EstimationError("singular information matrix in logistic fit");
        }
        const Eigen::VectorXd step = ldlt.solve(x.transpose() * (y - prob));
        fit.beta += step;
        prob = predict(x, fit.beta);
        const double next = binomial_deviance(y, prob);
        fit.iterations = it;
        const bool settled = std::abs(deviance - next) < opts.deviance_tolerance;
        deviance = next;
        if (settled) {
            fit.converged = true;
            break;
        }
        if (fit.beta.cwiseAbs().maxCoeff() > opts.separation_bound) {
            throw EstimationError(fmt::format("complete separation suspected (|beta| > {} at iteration {})",
                                              opts.separation_bound, it));
        }
    }
    if (!fit.beta.allFinite()) {
        throw EstimationError("logistic fit diverged");
    }
    fit.deviance = deviance;
    fit.fitted = prob;
    const Eigen::MatrixXd info = information(x, prob);
    fit.bread = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.bread = 0.5 * (fit.bread + fit.bread.transpose()).eval();
    return fit;
}

Eigen::MatrixXd cluster_sandwich(const LogisticFit &fit, const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                                 const std::vector<std::size_t> &clusters, const SandwichOptions &opts) {
    if (static_cast<Eigen::Index>(clusters.size()) != x.rows() || y.size() != x.rows()) {
        throw std::invalid_argument("cluster labels do not match the design matrix");
    }
    std::unordered_map<std::size_t, Eigen::Index> slot;
    for (std::size_t c : clusters) {
        slot.try_emplace(c, static_cast<Eigen::Index>(slot.size()));
    }
    const auto g = static_cast<Eigen::Index>(slot.size());
    if (g < 2) {
        throw EstimationError("cluster-robust covariance needs at least two clusters");
    }
    const Eigen::VectorXd resid = y - fit.fitted;
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(g, x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        scores.row(slot.at(clusters[static_cast<std::size_t>(i)])) += resid(i) * x.row(i);
    }
    const Eigen::MatrixXd meat = scores.transpose() * scores;
    double factor = opts.small_sample_correction ? static_cast<double>(g) / static_cast<double>(g - 1) : 1.0;
    if (opts.factor_override) {
        factor = *opts.factor_override;
    }
    Eigen::MatrixXd cov = factor * fit.bread * meat * fit.bread;
    return 0.5 * (cov + cov.transpose());
}

} // namespace anchorsim
