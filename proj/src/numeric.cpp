#include "anchorsim/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <numbers>

namespace anchorsim {

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
NormalQuadrature::NormalQuadrature(int order) {
    if (order < 1) {
        throw std::invalid_argument("quadrature order must be positive");
    }
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes.resize(order);
    weights.resize(order);
    for (int k = 0; k < order; ++k) {
        nodes[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        weights[k] = v0 * v0;
    }
}

double NormalQuadrature::expected_expit(double eta, double sd) const noexcept {
    if (sd == 0.0) {
        return expit(eta);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        total += weights[k] * expit(eta + sd * nodes[k]);
    }
    return total;
}

BisectionResult bisect_increasing(const std::function<double(double)> &f, double target, double lo,
                                  double hi, double tolerance, int max_iterations,
                                  const std::string &what) {
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (target < f_lo - tolerance || target > f_hi + tolerance) {
        throw TuningError(fmt::format("{}: target {:.4f} outside bracket [{}, {}] with endpoint values "
                                      "[{:.4f}, {:.4f}]",
                                      what, target, lo, hi, f_lo, f_hi));
    }
    BisectionResult result;
    for (int it = 1; it <= max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double value = f(mid);
        result = {mid, value, it};
        if (std::abs(value - target) <= tolerance && (hi - lo) < 1e-3) {
            return result;
        }
        if (value < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (std::abs(result.value - target) <= tolerance) {
        return result;
    }
    throw TuningError(fmt::format("{}: no convergence after {} bisection steps (last x={:.6f}, value={:.5f}, "
                                  "target {:.5f})",
                                  what, max_iterations, result.root, result.value, target));
}

} // namespace anchorsim
