#include "anchorsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <tuple>

namespace anchorsim {

bool ReplicateRecord::equivalent(double delta) const noexcept {
    return estimate && estimate->ci90.lo > p_true - delta && estimate->ci90.hi < p_true + delta;
}

double binomial_mcse(double proportion, std::size_t n) {
    if (n == 0) {
        return 0.0;
    }
    return std::sqrt(std::max(0.0, proportion * (1.0 - proportion)) / static_cast<double>(n));
}

std::optional<MetricValue> bias(std::span<const ReplicateRecord> records) {
    std::vector<double> diffs;
    for (const auto &r : records) {
        if (!r.failed()) {
            diffs.push_back(r.estimate->p_hat - r.p_true);
        }
    }
    if (diffs.size() < 2) {
        return std::nullopt;
    }
    // Sorting first makes the result independent of replicate order.
    std::sort(diffs.begin(), diffs.end());
    const double n = static_cast<double>(diffs.size());
    double mean = 0.0;
    for (double d : diffs) {
        mean += d;
    }
    mean /= n;
    double ss = 0.0;
    for (double d : diffs) {
        ss += (d - mean) * (d - mean);
    }
    return MetricValue{mean, std::sqrt(ss / (n * (n - 1.0)))};
}

namespace {

template <typename Pred>
std::optional<MetricValue> proportion(std::span<const ReplicateRecord> records, Pred pred) {
    std::size_t n = 0;
    std::size_t hits = 0;
    for (const auto &r : records) {
        if (r.failed()) {
            continue;
        }
        ++n;
        hits += pred(r) ? 1 : 0;
    }
    if (n == 0) {
        return std::nullopt;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return MetricValue{p, binomial_mcse(p, n)};
}

} // namespace

std::optional<MetricValue> coverage(std::span<const ReplicateRecord> records) {
    return proportion(records, [](const ReplicateRecord &r) { return r.covered(); });
}

std::optional<MetricValue> equivalence(std::span<const ReplicateRecord> records, double delta) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("equivalence margin must be positive");
    }
    return proportion(records, [delta](const ReplicateRecord &r) { return r.equivalent(delta); });
}

bool ScenarioSummary::failure_alarm() const noexcept {
    return n_rep > 0 && static_cast<double>(failure_count) / static_cast<double>(n_rep) > kFailureAlarmRate;
}

std::vector<ScenarioSummary> summarize(std::span<const ReplicateRecord> records) {
    std::vector<std::string> order;
    std::map<std::pair<std::string, Method>, std::vector<ReplicateRecord>> groups;
    for (const auto &r : records) {
        if (std::find(order.begin(), order.end(), r.scenario_id) == order.end()) {
            order.push_back(r.scenario_id);
        }
        groups[{r.scenario_id, r.method}].push_back(r);
    }
    std::vector<ScenarioSummary> out;
    for (const auto &id : order) {
        for (Method method : {Method::Calibrated, Method::LogisticImputation}) {
            const auto it = groups.find({id, method});
            if (it == groups.end()) {
                continue;
            }
            const auto &group = it->second;
            ScenarioSummary s;
            s.scenario_id = id;
            s.village_fraction = group.front().village_fraction;
            s.response_rate = group.front().response_rate;
            s.xi = group.front().xi;
            s.method = method;
            s.n_rep = group.size();
            double se_total = 0.0;
            for (const auto &r : group) {
                if (r.failed()) {
                    ++s.failure_count;
                } else {
                    se_total += r.estimate->se;
                }
            }
            s.n_rep_effective = s.n_rep - s.failure_count;
            s.mean_se = s.n_rep_effective > 0 ? se_total / static_cast<double>(s.n_rep_effective) : 0.0;
            s.bias = bias(group);
            s.coverage = coverage(group);
            s.equiv05 = equivalence(group, 0.05);
            s.equiv075 = equivalence(group, 0.075);
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::string format_proportion(double p) {
    if (p >= 0.9995) {
        return ">0.999";
    }
    return fmt::format("{:.3f}", p);
}

std::string format_bias(double b) {
    std::string s = fmt::format("{:.3f}", b);
    return s == "-0.000" ? "0.000" : s;
}

} // namespace anchorsim
