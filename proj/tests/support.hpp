#pragma once

#include "anchorsim/population.hpp"

#include <vector>

namespace testing {

/// Population with the given village sizes; covariates vary a little by
/// position so design matrices are not degenerate.
inline anchorsim::Population make_population(const std::vector<int> &sizes) {
    anchorsim::Population pop;
    std::size_t next = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        anchorsim::Village v;
        v.id = j;
        v.n_children = sizes[j];
        v.first_child = next;
        v.population_total = 25.0 * sizes[j];
        v.population_scaled = 0.1 * static_cast<double>(j);
        v.distance_km = 1.0 + static_cast<double>(j % 7);
        v.baseline_vaccinated = sizes[j] / 2;
        v.baseline_logodds = anchorsim::continuity_logodds(v.baseline_vaccinated, sizes[j]);
        pop.villages.push_back(v);
        for (int k = 0; k < sizes[j]; ++k) {
            anchorsim::Child c;
            c.id = next++;
            c.village_id = j;
            c.age_months = 12 + static_cast<int>((c.id * 5) % 13);
            c.male = c.id % 2 == 0;
            c.guardian_age_yr = 20.0 + static_cast<double>(c.id % 17);
            c.guardian_male = c.id % 11 == 0;
            pop.children.push_back(c);
        }
    }
    return pop;
}

} // namespace testing

#include "anchorsim/design.hpp"

namespace testing {

/// Sampled villages `villages`; within each, the first `take(V_j)` children respond.
template <class Take>
anchorsim::Sample first_children(const anchorsim::Population &pop, const std::vector<std::size_t> &villages,
                                 Take take) {
    anchorsim::Sample s;
    s.sampled_villages = villages;
    for (std::size_t j : villages) {
        const auto &v = pop.villages[j];
        const int k = take(v.n_children);
        for (int i = 0; i < k; ++i) {
            s.respondents.push_back(v.first_child + static_cast<std::size_t>(i));
        }
    }
    return s;
}

} // namespace testing
