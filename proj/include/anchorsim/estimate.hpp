#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace anchorsim {

enum class Method { Calibrated, LogisticImputation };

std::string_view method_name(Method m) noexcept;  ///< "calibrated" / "logistic"
std::string_view method_label(Method m) noexcept; ///< "Calibrated" / "Logistic Regression"
Method parse_method(std::string_view name);

/// Raised when one replicate cannot be estimated; the run continues.
class EstimationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    double width() const noexcept { return hi - lo; }
};

struct Diagnostics {
    std::size_t n_respondents = 0;
    std::size_t m_villages = 0;
    int iterations = 0;
    bool converged = true;
    std::size_t dropped_auxiliaries = 0;
    bool variance_clamped = false;
};

struct EstimateResult {
    Method method = Method::Calibrated;
    double p_hat = 0.0;
    double se = 0.0;
    Interval ci95;
    Interval ci90;
    Diagnostics diagnostics;
};

inline constexpr double kZ975 = 1.959963984540054;
inline constexpr double kZ950 = 1.6448536269514722;

/// Normal-theory intervals at 95% and 90%; not truncated to [0, 1].
std::pair<Interval, Interval> wald_intervals(double p_hat, double se);

} // namespace anchorsim
