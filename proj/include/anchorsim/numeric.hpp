#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace anchorsim {

inline double expit(double t) noexcept {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Nodes and weights for E[f(Z)], Z ~ N(0,1) (probabilists' Gauss-Hermite).
struct NormalQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit NormalQuadrature(int order = 40);

    /// E[expit(eta + sd * Z)].
    double expected_expit(double eta, double sd) const noexcept;
};

class TuningError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct BisectionResult {
    double root = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Finds x in [lo, hi] with |f(x) - target| <= tolerance for f non-decreasing.
/// Throws TuningError naming the endpoint values when target is outside [f(lo), f(hi)].
BisectionResult bisect_increasing(const std::function<double(double)> &f, double target, double lo,
                                  double hi, double tolerance, int max_iterations,
                                  const std::string &what);

} // namespace anchorsim
