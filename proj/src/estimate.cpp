#include "anchorsim/estimate.hpp"

#include <fmt/format.h>

namespace anchorsim {

std::string_view method_name(Method m) noexcept {
    return m == Method::Calibrated ? "calibrated" : "logistic";
}

std::string_view method_label(Method m) noexcept {
    return m == Method::Calibrated ? "Calibrated" : "Logistic Regression";
}

Method parse_method(std::string_view name) {
    if (name == "calibrated") {
        return Method::Calibrated;
    }
    if (name == "logistic") {
        return Method::LogisticImputation;
    }
    throw std::invalid_argument(fmt::format("unknown method '{}'", name));
}

std::pair<Interval, Interval> wald_intervals(double p_hat, double se) {
    if (!(se >= 0.0)) {
        throw std::invalid_argument("standard error must be >= 0");
    }
    return {Interval{p_hat - kZ975 * se, p_hat + kZ975 * se}, Interval{p_hat - kZ950 * se, p_hat + kZ950 * se}};
}

} // namespace anchorsim
