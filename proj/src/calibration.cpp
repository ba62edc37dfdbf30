#include "anchorsim/calibration.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace anchorsim {

double equilibrated_condition(const Eigen::MatrixXd &a) {
    const Eigen::Index p = a.rows();
    Eigen::VectorXd scale(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        if (!(a(k, k) > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        scale(k) = 1.0 / std::sqrt(a(k, k));
    }
    const Eigen::MatrixXd c = scale.asDiagonal() * a * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

namespace {

Eigen::MatrixXd weighted_cross_product(const Eigen::VectorXd &d, const Eigen::MatrixXd &x) {
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
    a.selfadjointView<Eigen::Lower>().rankUpdate((x.array().colwise() * d.array().sqrt()).matrix().transpose());
    return a.selfadjointView<Eigen::Lower>();
}

std::vector<Eigen::Index> columns_to_keep(const std::vector<Auxiliary> &all, const std::vector<Auxiliary> &dropped) {
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (std::find(dropped.begin(), dropped.end(), all[k]) == dropped.end()) {
            keep.push_back(static_cast<Eigen::Index>(k));
        }
    }
    return keep;
}

} // namespace

CalibrationResult calibrate_weights(const Eigen::VectorXd &d, const Eigen::MatrixXd &x,
                                    const Eigen::VectorXd &totals, const std::vector<Auxiliary> &columns,
                                    double condition_limit) {
    if (x.cols() != static_cast<Eigen::Index>(columns.size()) || totals.size() != x.cols() || d.size() != x.rows()) {
        throw std::invalid_argument("calibration inputs have inconsistent dimensions");
    }
    if (d.size() == 0) {
        throw EstimationError("empty sample");
    }

    CalibrationResult result;
    const Eigen::MatrixXd full = weighted_cross_product(d, x);

    // Columns with no sample variation beyond zero cannot be calibrated at all.
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] != Auxiliary::Intercept && !(full(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) > 0.0)) {
            result.dropped.push_back(columns[k]);
        }
    }

    std::size_t next_drop = 0;
    std::vector<Eigen::Index> keep;
    Eigen::MatrixXd a;
    for (;;) {
        keep = columns_to_keep(columns, result.dropped);
        if (keep.empty()) {
            throw EstimationError("no auxiliaries left to calibrate on");
        }
        a = full(keep, keep);
        result.condition_number = equilibrated_condition(a);
        if (result.condition_number <= condition_limit && keep.size() <= static_cast<std::size_t>(d.size())) {
            break;
        }
        while (next_drop < kDropOrder.size() &&
               (std::find(columns.begin(), columns.end(), kDropOrder[next_drop]) == columns.end() ||
                std::find(result.dropped.begin(), result.dropped.end(), kDropOrder[next_drop]) !=
                    result.dropped.end())) {
            ++next_drop;
        }
        if (next_drop == kDropOrder.size()) {
            throw EstimationError(fmt::format("singular calibration system (condition number {:.3g})",
                                              result.condition_number));
        }
        result.dropped.push_back(kDropOrder[next_drop++]);
    }

    for (Eigen::Index k : keep) {
        result.columns.push_back(columns[static_cast<std::size_t>(k)]);
    }
    const Eigen::MatrixXd xs = x(Eigen::all, keep);
    const Eigen::VectorXd t = totals(keep);
    const Eigen::VectorXd gap = t - xs.transpose() * d;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    result.lambda = ldlt.solve(gap);
    // One round of iterative refinement on the constraint residual.
    result.w = d.array() * (1.0 + (xs * result.lambda).array());
    Eigen::VectorXd residual = t - xs.transpose() * result.w;
    result.lambda += ldlt.solve(residual);
    result.w = d.array() * (1.0 + (xs * result.lambda).array());
    residual = t - xs.transpose() * result.w;

    const double scale = t.cwiseAbs().maxCoeff();
    result.relative_residual = scale > 0.0 ? residual.cwiseAbs().maxCoeff() / scale : residual.cwiseAbs().maxCoeff();
    if (!std::isfinite(result.relative_residual)) {
        throw EstimationError("calibration produced non-finite weights");
    }
    return result;
}

double ht_proportion(const Eigen::VectorXd &w, const Eigen::VectorXd &y, double population_size) {
    if (!(population_size > 0.0)) {
        throw std::invalid_argument("population size must be positive");
    }
    if (w.size() == 0) {
        throw EstimationError("empty sample");
    }
    if (w.size() != y.size()) {
        throw std::invalid_argument("weights and outcomes differ in length");
    }
    return w.dot(y) / population_size;
}

CalibrationVariance calibration_variance(const SurveySample &sample, const DesignWeights &dw,
                                         const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                                         double population_size, VarianceDivisor divisor) {
    const std::size_t m = sample.m_villages();
    if (m < 2) {
        throw EstimationError("variance undefined with fewer than two sampled villages");
    }
    const Eigen::VectorXd &d = dw.d;

    // GREG residuals from the d-weighted regression of y on x.
    const Eigen::MatrixXd a = weighted_cross_product(d, x);
    const Eigen::VectorXd b = a.ldlt().solve(x.transpose() * (d.array() * y.array()).matrix());
    const Eigen::VectorXd e = y - x * b;

    std::vector<double> z(m, 0.0);
    std::vector<double> sum_e(m, 0.0);
    std::vector<double> sum_e2(m, 0.0);
    for (std::size_t r = 0; r < sample.n_respondents(); ++r) {
        const std::size_t k = sample.psu[r];
        const double er = e(static_cast<Eigen::Index>(r));
        z[k] += er / dw.pi_within[k];
        sum_e[k] += er;
        sum_e2[k] += er * er;
    }

    const double md = static_cast<double>(m);
    const double big_m = static_cast<double>(sample.total_villages);
    double z_mean = 0.0;
    for (double zk : z) {
        z_mean += zk;
    }
    z_mean /= md;
    double s2z = 0.0;
    for (double zk : z) {
        s2z += (zk - z_mean) * (zk - z_mean);
    }
    s2z /= md - 1.0;

    CalibrationVariance out;
    out.between = big_m * big_m / md * s2z;
    for (std::size_t k = 0; k < m; ++k) {
        const int v = sample.village_respondents[k];
        if (v <= 1) {
            continue;
        }
        const double vd = static_cast<double>(v);
        const double s2e = std::max(0.0, (sum_e2[k] - sum_e[k] * sum_e[k] / vd) / (vd - 1.0));
        const double big_v = static_cast<double>(sample.village_sizes[k]);
        out.within += (1.0 / dw.pi_village) * (big_v * big_v / vd) * s2e;
    }

    if (divisor == VarianceDivisor::Estimated) {
        double n_hat = 0.0;
        for (int size : sample.village_sizes) {
            n_hat += size / dw.pi_village;
        }
        out.divisor = n_hat;
    } else {
        out.divisor = population_size;
    }
    out.se = std::sqrt(std::max(0.0, out.between + out.within)) / out.divisor;
    return out;
}

} // namespace anchorsim
