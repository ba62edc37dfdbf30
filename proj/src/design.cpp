#include "anchorsim/design.hpp"

#include "anchorsim/estimate.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <stdexcept>

namespace anchorsim {

std::string_view auxiliary_name(Auxiliary a) noexcept {
    switch (a) {
    case Auxiliary::Intercept:
        return "intercept";
    case Auxiliary::Population:
        return "population_scaled";
    case Auxiliary::Distance:
        return "distance_km";
    case Auxiliary::ChildAge:
        return "age_months";
    case Auxiliary::GuardianAge:
        return "guardian_age_yr";
    case Auxiliary::ChildMale:
        return "child_male";
    case Auxiliary::GuardianMale:
        return "guardian_male";
    case Auxiliary::BaselineLogodds:
        return "baseline_logodds";
    }
    return "?";
}

AuxiliaryMatrix AuxiliaryMatrix::from_population(const Population &pop) {
    AuxiliaryMatrix aux;
    aux.columns = {Auxiliary::Intercept,   Auxiliary::Population, Auxiliary::Distance,     Auxiliary::ChildAge,
                   Auxiliary::GuardianAge, Auxiliary::ChildMale,  Auxiliary::GuardianMale, Auxiliary::BaselineLogodds};
    const auto n = static_cast<Eigen::Index>(pop.children.size());
    aux.x.resize(n, static_cast<Eigen::Index>(kAuxiliaryCount));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &c = pop.children[static_cast<std::size_t>(i)];
        const auto &v = pop.villages[c.village_id];
        aux.x(i, 0) = 1.0;
        aux.x(i, 1) = v.population_scaled;
        aux.x(i, 2) = v.distance_km;
        aux.x(i, 3) = c.age_months;
        aux.x(i, 4) = c.guardian_age_yr;
        aux.x(i, 5) = c.male ? 1.0 : 0.0;
        aux.x(i, 6) = c.guardian_male ? 1.0 : 0.0;
        aux.x(i, 7) = v.baseline_logodds;
    }
    aux.totals = aux.x.colwise().sum().transpose();
    return aux;
}

Eigen::Index AuxiliaryMatrix::column_of(Auxiliary a) const {
    const auto it = std::find(columns.begin(), columns.end(), a);
    return it == columns.end() ? -1 : static_cast<Eigen::Index>(it - columns.begin());
}

AuxiliaryMatrix AuxiliaryMatrix::select(const std::vector<Auxiliary> &keep) const {
    AuxiliaryMatrix out;
    for (Auxiliary a : columns) {
        if (std::find(keep.begin(), keep.end(), a) != keep.end()) {
            out.columns.push_back(a);
        }
    }
    out.x.resize(x.rows(), static_cast<Eigen::Index>(out.columns.size()));
    out.totals.resize(static_cast<Eigen::Index>(out.columns.size()));
    for (std::size_t k = 0; k < out.columns.size(); ++k) {
        const Eigen::Index src = column_of(out.columns[k]);
        out.x.col(static_cast<Eigen::Index>(k)) = x.col(src);
        out.totals(static_cast<Eigen::Index>(k)) = totals(src);
    }
    return out;
}

SurveySample make_survey_sample(const Population &pop, const AuxiliaryMatrix &aux, const Sample &sample,
                                const std::vector<std::uint8_t> &y1) {
    SurveySample s;
    s.total_villages = pop.villages.size();
    s.villages = sample.sampled_villages;
    s.village_sizes.reserve(s.villages.size());
    s.village_respondents.assign(s.villages.size(), 0);
    for (std::size_t j : s.villages) {
        s.village_sizes.push_back(pop.villages.at(j).n_children);
    }
    const auto n = static_cast<Eigen::Index>(sample.respondents.size());
    s.x.resize(n, aux.x.cols());
    s.y.resize(n);
    s.psu.reserve(sample.respondents.size());
    s.child_ids = sample.respondents;
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t i = sample.respondents[static_cast<std::size_t>(r)];
        const std::size_t village = pop.children.at(i).village_id;
        const auto it = std::lower_bound(s.villages.begin(), s.villages.end(), village);
        if (it == s.villages.end() || *it != village) {
            throw std::invalid_argument(fmt::format("respondent {} is not in a sampled village", i));
        }
        const auto k = static_cast<std::size_t>(it - s.villages.begin());
        s.psu.push_back(k);
        ++s.village_respondents[k];
        s.x.row(r) = aux.x.row(static_cast<Eigen::Index>(i));
        s.y(r) = y1.at(i);
    }
    return s;
}

DesignWeights compute_design_weights(const SurveySample &sample) {
    const std::size_t m = sample.m_villages();
    if (m == 0 || sample.total_villages == 0) {
        throw EstimationError("no sampled villages");
    }
    if (sample.n_respondents() == 0) {
        throw EstimationError("empty sample");
    }
    DesignWeights dw;
    dw.pi_village = static_cast<double>(m) / static_cast<double>(sample.total_villages);
    dw.pi_within.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        dw.pi_within[k] = static_cast<double>(sample.village_respondents[k]) / sample.village_sizes[k];
    }
    dw.d.resize(static_cast<Eigen::Index>(sample.n_respondents()));
    for (std::size_t r = 0; r < sample.n_respondents(); ++r) {
        const double pw = dw.pi_within[sample.psu[r]];
        if (!(pw > 0.0)) {
            throw EstimationError(
                fmt::format("respondent {} belongs to village {} with zero recorded respondents", r,
                            sample.villages[sample.psu[r]]));
        }
        dw.d(static_cast<Eigen::Index>(r)) = 1.0 / (dw.pi_village * pw);
    }
    return dw;
}

} // namespace anchorsim
