#pragma once

#include "anchorsim/estimate.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace anchorsim {

struct ReplicateRecord {
    std::string scenario_id;
    double village_fraction = 0.0;
    double response_rate = 0.0;
    double xi = 1.0;
    std::size_t rep_index = 0;
    Method method = Method::Calibrated;
    double p_true = 0.0;
    std::optional<EstimateResult> estimate; ///< empty when the replicate failed
    std::string failure_reason;

    bool failed() const noexcept { return !estimate.has_value(); }
    bool covered() const noexcept { return estimate && estimate->ci95.contains(p_true); }
    bool equivalent(double delta) const noexcept;
};

struct MetricValue {
    double value = 0.0;
    double mcse = 0.0;
};

/// Mean of p_hat - p_true with MCSE sqrt(sum (d - dbar)^2 / (n (n - 1))).
/// Empty when fewer than two successful replicates.
std::optional<MetricValue> bias(std::span<const ReplicateRecord> records);

/// Share of successful replicates whose 95% interval contains p_true, with
/// binomial MCSE. Empty when no replicate succeeded.
std::optional<MetricValue> coverage(std::span<const ReplicateRecord> records);

/// Share of successful replicates whose 90% interval lies inside
/// (p_true - delta, p_true + delta), with binomial MCSE.
std::optional<MetricValue> equivalence(std::span<const ReplicateRecord> records, double delta);

/// sqrt(p (1 - p) / n).
double binomial_mcse(double proportion, std::size_t n);

inline constexpr double kFailureAlarmRate = 0.01;

struct ScenarioSummary {
    std::string scenario_id;
    double village_fraction = 0.0;
    double response_rate = 0.0;
    double xi = 1.0;
    Method method = Method::Calibrated;
    std::size_t n_rep = 0;
    std::size_t n_rep_effective = 0;
    std::size_t failure_count = 0;
    std::optional<MetricValue> bias;
    std::optional<MetricValue> coverage;
    std::optional<MetricValue> equiv05;
    std::optional<MetricValue> equiv075;
    double mean_se = 0.0;

    bool failure_alarm() const noexcept;
};

/// One summary per (scenario, method), in order of first appearance with
/// Calibrated before Logistic Regression.
std::vector<ScenarioSummary> summarize(std::span<const ReplicateRecord> records);

/// Three decimals; values >= 0.9995 render as ">0.999".
std::string format_proportion(double p);
/// Three decimals (signed).
std::string format_bias(double b);

} // namespace anchorsim
