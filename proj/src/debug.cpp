#include "anchorsim/debug.hpp"

#include "anchorsim/csv.hpp"
#include "anchorsim/design.hpp"

#include <fmt/format.h>
#include <ostream>
#include <stdexcept>

namespace anchorsim {

void write_realization_csv(const Population &pop, const Realization &r, std::ostream &out) {
    std::vector<std::uint8_t> sampled(pop.villages.size(), 0);
    for (std::size_t j : r.sample.sampled_villages) {
        sampled[j] = 1;
    }
    std::vector<std::uint8_t> respondent(pop.children.size(), 0);
    for (std::size_t i : r.sample.respondents) {
        respondent[i] = 1;
    }
    out << "child_id,village_id,age_months,male,guardian_age_yr,guardian_male,village_n_children,"
           "population_total,population_scaled,distance_km,baseline_vaccinated,baseline_logodds,"
           "y1,attended,sampled_village,respondent\n";
    for (const auto &c : pop.children) {
        const auto &v = pop.villages[c.village_id];
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.id, c.village_id, c.age_months,
                           c.male ? 1 : 0, csv::number(c.guardian_age_yr), c.guardian_male ? 1 : 0, v.n_children,
                           csv::number(v.population_total), csv::number(v.population_scaled),
                           csv::number(v.distance_km), v.baseline_vaccinated, csv::number(v.baseline_logodds),
                           int(r.followup.y1[c.id]), int(r.attended[c.id]), int(sampled[c.village_id]),
                           int(respondent[c.id]));
    }
}

DumpedRealization read_realization_csv(const std::filesystem::path &path) {
    const csv::Table t = csv::read_table(path);
    const auto col = [&](std::string_view name) { return t.column(name); };
    const std::size_t c_id = col("child_id"), c_v = col("village_id"), c_age = col("age_months"),
                      c_male = col("male"), c_gage = col("guardian_age_yr"), c_gmale = col("guardian_male"),
                      c_vn = col("village_n_children"), c_pt = col("population_total"),
                      c_ps = col("population_scaled"), c_dist = col("distance_km"),
                      c_bv = col("baseline_vaccinated"), c_bl = col("baseline_logodds"), c_y = col("y1"),
                      c_sv = col("sampled_village"), c_r = col("respondent");

    DumpedRealization d;
    Population &pop = d.population;
    for (std::size_t row = 0; row < t.rows.size(); ++row) {
        const auto &f = t.rows[row];
        const auto id = static_cast<std::size_t>(std::stoull(f[c_id]));
        const auto vid = static_cast<std::size_t>(std::stoull(f[c_v]));
        if (id != row) {
            throw std::runtime_error(fmt::format("{}: child_id {} out of order at row {}", path.string(), id, row + 2));
        }
        if (vid == pop.villages.size()) {
            Village v;
            v.id = vid;
            v.n_children = std::stoi(f[c_vn]);
            v.first_child = id;
            v.population_total = std::stod(f[c_pt]);
            v.population_scaled = std::stod(f[c_ps]);
            v.distance_km = std::stod(f[c_dist]);
            v.baseline_vaccinated = std::stoi(f[c_bv]);
            v.baseline_logodds = std::stod(f[c_bl]);
            pop.villages.push_back(v);
            if (f[c_sv] == "1") {
                d.sample.sampled_villages.push_back(vid);
            }
        } else if (vid + 1 != pop.villages.size()) {
            throw std::runtime_error(fmt::format("{}: villages not contiguous at row {}", path.string(), row + 2));
        }
        Child c;
        c.id = id;
        c.village_id = vid;
        c.age_months = std::stoi(f[c_age]);
        c.male = f[c_male] == "1";
        c.guardian_age_yr = std::stod(f[c_gage]);
        c.guardian_male = f[c_gmale] == "1";
        pop.children.push_back(c);
        d.y1.push_back(f[c_y] == "1" ? 1 : 0);
        if (f[c_r] == "1") {
            d.sample.respondents.push_back(id);
        }
    }
    pop.check_invariants();
    return d;
}

SingleShot estimate_dumped(const DumpedRealization &data, const EstimatorOptions &options) {
    SingleShot out;
    std::size_t vaccinated = 0;
    for (auto y : data.y1) {
        vaccinated += y;
    }
    out.p_true = data.y1.empty() ? 0.0 : double(vaccinated) / double(data.y1.size());
    const auto aux = AuxiliaryMatrix::from_population(data.population);
    const SurveySample survey = make_survey_sample(data.population, aux, data.sample, data.y1);
    try {
        out.calibrated = estimate_calibrated(survey, aux, options);
    } catch (const EstimationError &e) {
        out.calibrated_error = e.what();
    }
    try {
        out.imputation = estimate_imputation(survey, aux, options);
    } catch (const EstimationError &e) {
        out.imputation_error = e.what();
    }
    return out;
}

} // namespace anchorsim
