#pragma once

#include "anchorsim/dgm.hpp"
#include "anchorsim/estimators.hpp"
#include "anchorsim/population.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace anchorsim {

/// A realization reloaded from a dump: census plus follow-up outcome and sample flags.
struct DumpedRealization {
    Population population;
    std::vector<std::uint8_t> y1;
    Sample sample;
};

/// Population columns followed by y1, attended, sampled_village and respondent.
void write_realization_csv(const Population &pop, const Realization &r, std::ostream &out);
DumpedRealization read_realization_csv(const std::filesystem::path &path);

struct SingleShot {
    double p_true = 0.0;
    std::optional<EstimateResult> calibrated;
    std::optional<EstimateResult> imputation;
    std::string calibrated_error;
    std::string imputation_error;
};

SingleShot estimate_dumped(const DumpedRealization &data, const EstimatorOptions &options);

} // namespace anchorsim
