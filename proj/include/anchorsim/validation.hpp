#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace anchorsim {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationOptions {
    std::uint64_t seed = 11;
    std::size_t randomized_instances = 50;
    std::size_t monte_carlo_redraws = 10000;
    /// Fault injection: forces the sandwich correction factor.
    std::optional<double> sandwich_factor_override;
    std::function<void(const CheckResult &)> on_check;
};

/// Runs the oracle and invariant checks; each result is also passed to
/// `on_check` as soon as it is known.
std::vector<CheckResult> run_validation_suite(const ValidationOptions &options = {});

// Individual checks (also used by the acceptance suite).
CheckResult check_calibration_constraints(const ValidationOptions &options);
CheckResult check_calibration_kkt(const ValidationOptions &options);
CheckResult check_logistic_newton(const ValidationOptions &options);
CheckResult check_delta_gradient(const ValidationOptions &options);
CheckResult check_census_identity_calibrated(const ValidationOptions &options);
CheckResult check_census_identity_imputation(const ValidationOptions &options);
CheckResult check_calibration_variance_oracle(const ValidationOptions &options);
CheckResult check_imputation_variance_oracle(const ValidationOptions &options);
CheckResult check_icc_roundtrip(const ValidationOptions &options);

/// Relative tolerance of the Monte Carlo variance checks.
inline constexpr double kCalibrationVarianceTolerance = 0.10;
inline constexpr double kImputationVarianceTolerance = 0.10;

} // namespace anchorsim
